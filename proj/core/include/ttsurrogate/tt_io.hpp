#pragma once

#include <filesystem>
#include <iosfwd>

#include "ttsurrogate/tensor_train.hpp"

namespace ttsurrogate {

// Binary little-endian layout:
//   "TTV1" | u32 d | d x ( u32 r_left, u32 n, u32 r_right, f64[r_left*n*r_right] )
//   "TTM1" | u32 d | d x ( u32 r_left, u32 m, u32 n, u32 r_right, f64[...] )
// Doubles are written as their raw IEEE-754 bit patterns, so a round trip
// is bit-exact.

void write_tt(std::ostream& os, const TensorTrain& tt);
TensorTrain read_tt(std::istream& is);

void write_ttm(std::ostream& os, const TTMatrix& m);
TTMatrix read_ttm(std::istream& is);

void save_tt(const std::filesystem::path& path, const TensorTrain& tt);
TensorTrain load_tt(const std::filesystem::path& path);

void save_ttm(const std::filesystem::path& path, const TTMatrix& m);
TTMatrix load_ttm(const std::filesystem::path& path);

}  // namespace ttsurrogate
