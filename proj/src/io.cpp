#include "sgs/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

namespace sgs::io {

static_assert(std::endian::native == std::endian::little, "grid dumps assume a little-endian host");

namespace {

constexpr char kMagic[4] = {'S', 'G', 'S', '1'};

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    return out;
}

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) fail(ErrorCode::IoError, "truncated grid dump " + path.string());
    return v;
}

void write_header(std::ofstream& out, const GridSpec& s, std::uint8_t kind) {
    out.write(kMagic, 4);
    put(out, static_cast<std::uint32_t>(s.n()));
    put(out, s.box_length());
    put(out, kind);
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace

void write_grid(const std::filesystem::path& path, const RealField& f) {
    auto out = open_out(path, std::ios::binary);
    write_header(out, f.spec, 0);
    out.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    finish(out, path);
}

void write_grid(const std::filesystem::path& path, const ComplexField& f) {
    auto out = open_out(path, std::ios::binary);
    write_header(out, f.spec, 1);
    out.write(reinterpret_cast<const char*>(f.values.data()),
              static_cast<std::streamsize>(f.values.size() * sizeof(Complex)));
    finish(out, path);
}

std::variant<RealField, ComplexField> read_grid(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        fail(ErrorCode::IoError, path.string() + " is not a grid dump");
    const auto n = get<std::uint32_t>(in, path);
    const auto box = get<double>(in, path);
    const auto kind = get<std::uint8_t>(in, path);
    const GridSpec spec(static_cast<int>(n), box);
    spec.validate();
    if (kind == 0) {
        RealField f(spec);
        if (!in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double))))
            fail(ErrorCode::IoError, "truncated grid dump " + path.string());
        return f;
    }
    if (kind != 1) fail(ErrorCode::IoError, "unknown field kind in " + path.string());
    ComplexField f(spec);
    if (!in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(Complex))))
        fail(ErrorCode::IoError, "truncated grid dump " + path.string());
    return f;
}

std::string format_double(double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj, std::size_t particle) {
    require(particle < traj.particle_count(), "write_trajectory_csv: particle index out of range");
    std::string text = "t,x,y,z,vx,vy,vz\n";
    const auto& xs = traj.positions[particle];
    const auto& vs = traj.velocities[particle];
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        text += format_double(traj.times[i]);
        for (double c : xs[i]) text += "," + format_double(c);
        for (double c : vs[i]) text += "," + format_double(c);
        text += "\n";
    }
    write_text(path, text);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto out = open_out(path, std::ios::binary);
    out << text;
    finish(out, path);
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
    std::uint64_t h = 14695981039346656037ULL;
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[static_cast<std::size_t>(i)]);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    for (int i = 15; i >= 0; --i) {
        buf[i] = "0123456789abcdef"[v & 0xf];
        v >>= 4;
    }
    buf[16] = '\0';
    return buf;
}

}  // namespace sgs::io
