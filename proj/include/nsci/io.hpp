#pragma once

#include "nsci/field.hpp"
#include "nsci/iterate.hpp"

#include <filesystem>
#include <string>

namespace nsci {

// Field container, little-endian:
//   8 bytes  magic "NSCIFLD1"
//   uint32   n (points per axis)
//   uint32   component count
//   int32    time index
//   float64  time
//   float64  n^3 * components real samples, components interleaved per point,
//            points in Grid::index order
struct RawField {
    int n = 0;
    int components = 0;
    int time_index = 0;
    double time = 0;
    std::vector<double> data;
};

void write_raw(const std::filesystem::path& path, const RawField& f);
// Throws Error(config) on a bad magic, a truncated payload or an unreadable file.
RawField read_raw(const std::filesystem::path& path);

template <int C>
RawField to_raw(const Field<C>& f, int time_index, double time);
template <int C>
Field<C> from_raw(const RawField& r);

// 2D slice at index `at` along `axis` (0..2): columns i, j, x_i, x_j, c0..c{C-1}.
template <int C>
std::string slice_csv(const Field<C>& f, int axis, int at);

// One directory per state: v_0000.nsf, p_0000.nsf, R_0000.nsf, ... for every
// time sample. Pressure and stress files are optional on read (zero if absent).
void write_state(const std::filesystem::path& dir, const NSRState& state);
std::vector<Snapshot> read_samples(const std::filesystem::path& dir, const Grid& g, const TimeGrid& times);

// Writes text to a file, creating parent directories; throws Error(config) on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace nsci
