#include "fracms/trajectory.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "fracms/error.hpp"

namespace fracms {

namespace {

constexpr char kMagic[8] = {'F', 'R', 'M', 'S', 'T', 'R', 'J', '1'};

template <class T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw ParseError("trajectory: truncated header", 0);
    return v;
}

}  // namespace

Trajectory::Trajectory(std::string tag, int dim, double alpha, double dt)
    : tag_(std::move(tag)), dim_(dim), alpha_(alpha), dt_(dt) {
    if (dim < 0) throw InvalidArgument("trajectory dimension must be >= 0");
}

void Trajectory::push(const Vector& u) {
    if (u.size() != dim_)
        throw InvalidArgument("trajectory: state of size " + std::to_string(u.size()) + ", expected " +
                              std::to_string(dim_));
    data_.insert(data_.end(), u.data(), u.data() + u.size());
}

Eigen::Map<const Vector> Trajectory::state(int k) const {
    if (k < 0 || k >= size()) throw InvalidArgument("trajectory: state " + std::to_string(k) + " out of range");
    return Eigen::Map<const Vector>(data_.data() + static_cast<std::size_t>(k) * dim_, dim_);
}

void Trajectory::write(std::ostream& out) const {
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(tag_.size()));
    out.write(tag_.data(), static_cast<std::streamsize>(tag_.size()));
    put(out, alpha_);
    put(out, dt_);
    put<std::int64_t>(out, size());
    put<std::int64_t>(out, dim_);
    out.write(reinterpret_cast<const char*>(data_.data()), static_cast<std::streamsize>(data_.size() * sizeof(double)));
}

void Trajectory::write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write trajectory file '" + path + "'");
    write(out);
    if (!out) throw Error("write failed for '" + path + "'");
}

Trajectory Trajectory::read(std::istream& in) {
    char magic[sizeof kMagic];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw ParseError("trajectory: bad magic", 0);
    const auto len = get<std::uint32_t>(in);
    std::string tag(len, '\0');
    if (!in.read(tag.data(), len)) throw ParseError("trajectory: truncated tag", 0);
    const double alpha = get<double>(in);
    const double dt = get<double>(in);
    const auto rows = get<std::int64_t>(in);
    const auto dim = get<std::int64_t>(in);
    if (rows < 0 || dim < 0) throw ParseError("trajectory: negative dimensions", 0);
    Trajectory t(tag, static_cast<int>(dim), alpha, dt);
    t.data_.resize(static_cast<std::size_t>(rows * dim));
    if (!in.read(reinterpret_cast<char*>(t.data_.data()), static_cast<std::streamsize>(t.data_.size() * sizeof(double))))
        throw ParseError("trajectory: truncated data", 0);
    return t;
}

Trajectory Trajectory::read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open trajectory file '" + path + "'");
    return read(in);
}

}  // namespace fracms
