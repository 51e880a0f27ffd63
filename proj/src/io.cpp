#include "nsci/io.hpp"

#include "nsci/errors.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nsci {

namespace {

constexpr char kMagic[8] = {'N', 'S', 'C', 'I', 'F', 'L', 'D', '1'};

template <typename T>
void put(std::ostream& os, T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    unsigned char b[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw Error(err::config, "truncated field file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

std::string sample_name(char what, int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c_%04d.nsf", what, i);
    return buf;
}

}  // namespace

void write_raw(const std::filesystem::path& path, const RawField& f) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(err::config, "cannot write " + path.string());
    os.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(os, std::uint32_t(f.n));
    put<std::uint32_t>(os, std::uint32_t(f.components));
    put<std::int32_t>(os, std::int32_t(f.time_index));
    put<double>(os, f.time);
    for (double v : f.data) put<double>(os, v);
    if (!os) throw Error(err::config, "write failed for " + path.string());
}

RawField read_raw(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(err::config, "cannot read " + path.string());
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw Error(err::config, path.string() + " is not a field file");
    RawField f;
    f.n = int(get<std::uint32_t>(is));
    f.components = int(get<std::uint32_t>(is));
    f.time_index = get<std::int32_t>(is);
    f.time = get<double>(is);
    if (f.n <= 0 || f.n > 4096 || f.components <= 0 || f.components > 6)
        throw Error(err::config, path.string() + ": bad header");
    const std::size_t count = std::size_t(f.n) * f.n * f.n * f.components;
    f.data.resize(count);
    for (auto& v : f.data) v = get<double>(is);
    return f;
}

template <int C>
RawField to_raw(const Field<C>& f, int time_index, double time) {
    RawField r;
    r.n = f.grid.n;
    r.components = C;
    r.time_index = time_index;
    r.time = time;
    auto s = samples(f);
    const std::size_t N = f.grid.real_size();
    r.data.resize(N * C);
    for (std::size_t p = 0; p < N; ++p)
        for (int c = 0; c < C; ++c) r.data[p * C + c] = s[c](Eigen::Index(p));
    return r;
}

template <int C>
Field<C> from_raw(const RawField& r) {
    if (r.components != C)
        throw Error(err::config, "field file has " + std::to_string(r.components) + " components, expected " +
                                     std::to_string(C));
    Grid g = make_grid(r.n);
    const std::size_t N = g.real_size();
    std::array<Samples, C> s;
    for (int c = 0; c < C; ++c) {
        s[c].resize(Eigen::Index(N));
        for (std::size_t p = 0; p < N; ++p) s[c](Eigen::Index(p)) = r.data[p * C + c];
    }
    return from_samples<C>(g, s);
}

template <int C>
std::string slice_csv(const Field<C>& f, int axis, int at) {
    const Grid& g = f.grid;
    if (axis < 0 || axis > 2 || at < 0 || at >= g.n) throw Error(err::config, "slice out of range");
    auto s = samples(f);
    std::ostringstream os;
    os.precision(17);
    os << "i,j,x_i,x_j";
    for (int c = 0; c < C; ++c) os << ",c" << c;
    os << "\n";
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            int idx[3];
            idx[axis] = at;
            idx[axis == 0 ? 1 : 0] = i;
            idx[axis == 2 ? 1 : 2] = j;
            const auto p = Eigen::Index(g.index(idx[0], idx[1], idx[2]));
            os << i << "," << j << "," << g.x(i) << "," << g.x(j);
            for (int c = 0; c < C; ++c) os << "," << s[c](p);
            os << "\n";
        }
    return os.str();
}

void write_state(const std::filesystem::path& dir, const NSRState& state) {
    std::filesystem::create_directories(dir);
    for (int i = 0; i < state.size(); ++i) {
        Snapshot s = state.at(i);
        write_raw(dir / sample_name('v', i), to_raw(s.v, i, s.t));
        write_raw(dir / sample_name('p', i), to_raw(s.p, i, s.t));
        write_raw(dir / sample_name('R', i), to_raw(s.R, i, s.t));
    }
}

std::vector<Snapshot> read_samples(const std::filesystem::path& dir, const Grid& g, const TimeGrid& times) {
    std::vector<Snapshot> out;
    for (int i = 0; i < times.nt; ++i) {
        Snapshot s = zero_snapshot(g, times.at(i));
        s.dv.reset();
        s.dR.reset();
        RawField rv = read_raw(dir / sample_name('v', i));
        if (rv.n != g.n) throw Error(err::grid_mismatch, "snapshot grid " + std::to_string(rv.n));
        s.v = from_raw<3>(rv);
        if (auto pp = dir / sample_name('p', i); std::filesystem::exists(pp)) s.p = from_raw<1>(read_raw(pp));
        if (auto pr = dir / sample_name('R', i); std::filesystem::exists(pr)) s.R = from_raw<6>(read_raw(pr));
        out.push_back(std::move(s));
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os || !(os << text)) throw Error(err::config, "cannot write " + path.string());
}

#define NSCI_IO(C)                                                      \
    template RawField to_raw<C>(const Field<C>&, int, double);          \
    template Field<C> from_raw<C>(const RawField&);                     \
    template std::string slice_csv<C>(const Field<C>&, int, int);
NSCI_IO(1)
NSCI_IO(3)
NSCI_IO(6)
#undef NSCI_IO

}  // namespace nsci
