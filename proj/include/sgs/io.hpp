#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>

#include "sgs/grid.hpp"
#include "sgs/guidance.hpp"

namespace sgs::io {

/**
 * Binary grid dump, little endian:
 *
 *     "SGS1"  magic
 *     u32     n (points per axis)
 *     f64     box length
 *     u8      0 = real, 1 = complex
 *     f64...  n^3 values (complex as re, im pairs) in flat index order
 */
void write_grid(const std::filesystem::path& path, const RealField& f);
void write_grid(const std::filesystem::path& path, const ComplexField& f);

std::variant<RealField, ComplexField> read_grid(const std::filesystem::path& path);

/// CSV with header t,x,y,z,vx,vy,vz for one particle of a trajectory.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj, std::size_t particle);

void write_text(const std::filesystem::path& path, const std::string& text);

/// 64-bit FNV-1a over the file bytes.
std::uint64_t fnv1a_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace sgs::io
