#pragma once

// Append-only sequence of coefficient vectors u^0..u^N in one space.
// States are stored contiguously so the history sum can stream over them.

#include <iosfwd>
#include <string>
#include <vector>

#include "fracms/linalg.hpp"

namespace fracms {

class Trajectory {
public:
    Trajectory() = default;
    Trajectory(std::string tag, int dim, double alpha, double dt);

    const std::string& tag() const noexcept { return tag_; }
    int dim() const noexcept { return dim_; }
    double alpha() const noexcept { return alpha_; }
    double dt() const noexcept { return dt_; }
    /// Number of stored states (N + 1 after N steps).
    int size() const noexcept { return dim_ == 0 ? 0 : static_cast<int>(data_.size() / dim_); }
    bool empty() const noexcept { return data_.empty(); }
    int steps() const noexcept { return size() - 1; }

    void push(const Vector& u);
    Eigen::Map<const Vector> state(int k) const;
    Eigen::Map<const Vector> back() const { return state(size() - 1); }
    /// Row-major block of all states (stride dim()).
    const double* data() const noexcept { return data_.data(); }
    void reserve(int states) { data_.reserve(static_cast<std::size_t>(states) * dim_); }

    /// Binary dump: magic, tag, alpha, dt, rows, dim, then rows x dim doubles.
    void write(std::ostream& out) const;
    void write_file(const std::string& path) const;
    static Trajectory read(std::istream& in);
    static Trajectory read_file(const std::string& path);

private:
    std::string tag_;
    int dim_ = 0;
    double alpha_ = 0.0;
    double dt_ = 0.0;
    std::vector<double> data_;
};

}  // namespace fracms
