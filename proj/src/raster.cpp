#include "fracms/raster.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fracms/error.hpp"

namespace fracms {

namespace {

bool parse_number(std::string_view tok, double& v) {
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    return ec == std::errc() && ptr == tok.data() + tok.size();
}

}  // namespace

Raster read_raster(std::istream& in) {
    Raster r;
    std::string line;
    int lineno = 0;
    // Header.
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") != std::string::npos) break;
    }
    if (lineno == 0 || line.find_first_not_of(" \t\r") == std::string::npos)
        throw ParseError("raster: missing \"nx ny\" header", lineno);
    {
        std::istringstream hs(line);
        std::string extra;
        if (!(hs >> r.nx >> r.ny) || (hs >> extra))
            throw ParseError("raster: header must be \"nx ny\"", lineno);
        if (r.nx <= 0 || r.ny <= 0) throw ParseError("raster: dimensions must be positive", lineno);
    }
    const std::size_t expected = static_cast<std::size_t>(r.nx) * static_cast<std::size_t>(r.ny);
    r.values.reserve(expected);
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t pos = 0;
        while (true) {
            pos = line.find_first_not_of(" \t\r,", pos);
            if (pos == std::string::npos) break;
            const std::size_t end = line.find_first_of(" \t\r,", pos);
            const std::string_view tok(line.data() + pos, (end == std::string::npos ? line.size() : end) - pos);
            double v = 0.0;
            if (!parse_number(tok, v)) throw ParseError("raster: bad value '" + std::string(tok) + "'", lineno);
            if (r.values.size() == expected)
                throw ParseError("raster: more than " + std::to_string(expected) + " values", lineno);
            r.values.push_back(v);
            pos = end;
            if (pos == std::string::npos) break;
        }
    }
    if (r.values.size() != expected)
        throw ParseError("raster: expected " + std::to_string(expected) + " values, found " +
                             std::to_string(r.values.size()),
                         lineno);
    return r;
}

Raster read_raster_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open raster file '" + path + "'");
    try {
        return read_raster(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.detail(), e.line());
    }
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_raster(std::ostream& out, const Raster& r) {
    if (r.values.size() != static_cast<std::size_t>(r.nx) * static_cast<std::size_t>(r.ny))
        throw InvalidArgument("raster: value count does not match dimensions");
    out << r.nx << ' ' << r.ny << '\n';
    for (int iy = 0; iy < r.ny; ++iy) {
        for (int ix = 0; ix < r.nx; ++ix) {
            if (ix > 0) out << ' ';
            out << format_double(r.at(ix, iy));
        }
        out << '\n';
    }
}

void write_raster_file(const std::string& path, const Raster& r) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write raster file '" + path + "'");
    write_raster(out, r);
    if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace fracms
