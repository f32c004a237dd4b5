#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ttsurrogate/grid.hpp"

namespace ttsurrogate::cli {

/// Reads query points whose header lists the grid's feature names in order.
/// A trailing `price` column is tolerated and ignored. An empty file yields
/// no rows. Throws ConfigError on any schema mismatch.
RowMatrix read_query_csv(const std::filesystem::path& path, const FeatureGrid& grid);

/// Header is the feature names followed by `price`; values keep full precision.
void write_price_csv(std::ostream& os, const FeatureGrid& grid, const RowMatrix& x, std::span<const double> prices);

}  // namespace ttsurrogate::cli
