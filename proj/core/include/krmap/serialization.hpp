#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "krmap/density.hpp"
#include "krmap/dirt.hpp"
#include "krmap/sparse.hpp"

namespace krmap {

// JSON text formats. Doubles are written in shortest round-trip form, so
// save/load reproduces every coefficient bit for bit. Parse failures throw
// FormatError.
std::string to_json(const MultiIndexSet& set);
MultiIndexSet multi_index_set_from_json(std::string_view text);

std::string to_json(const SquaredPolyDensity& density);
std::shared_ptr<const SquaredPolyDensity> density_from_json(std::string_view text);

std::string to_json(const ComposedMap& map);
ComposedMap composed_map_from_json(std::string_view text);

void save_map(const ComposedMap& map, const std::filesystem::path& path);
ComposedMap load_map(const std::filesystem::path& path);

std::string_view map_format_version();

}  // namespace krmap
