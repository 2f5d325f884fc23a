#include "krmap/serialization.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "krmap/errors.hpp"

namespace krmap {
namespace {

using nlohmann::json;

constexpr std::string_view kFormat = "krmap-map/1";

json set_json(const MultiIndexSet& set) {
  json idx = json::array();
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto k = set[i];
    idx.push_back(std::vector<int>(k.begin(), k.end()));
  }
  return {{"dim", set.dim()}, {"indices", std::move(idx)}};
}

MultiIndexSet set_from(const json& j) {
  const int dim = j.at("dim").get<int>();
  const auto idx = j.at("indices").get<std::vector<std::vector<int>>>();
  return MultiIndexSet(dim, idx);
}

json map_json(const DomainMap& m) {
  return {{"kind", std::string(to_string(m.kind()))}, {"a", m.a()}, {"b", m.b()}};
}

DomainMap map_from(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "linear") return DomainMap::linear(j.at("a").get<double>(), j.at("b").get<double>());
  if (kind == "logarithmic") return DomainMap::logarithmic();
  if (kind == "algebraic") return DomainMap::algebraic();
  throw FormatError("unknown domain map kind: " + kind);
}

json density_json(const SquaredPolyDensity& d) {
  json maps = json::array();
  for (const auto& m : d.maps()) maps.push_back(map_json(m));
  return {{"family", std::string(to_string(d.family()))},
          {"maps", std::move(maps)},
          {"set", set_json(d.set())},
          {"coefficients", d.coefficients()},
          {"gamma", d.gamma()}};
}

std::shared_ptr<const SquaredPolyDensity> density_from(const json& j) {
  std::vector<DomainMap> maps;
  for (const auto& m : j.at("maps")) maps.push_back(map_from(m));
  return std::make_shared<const SquaredPolyDensity>(
      basis_family_from_string(j.at("family").get<std::string>()), std::move(maps), set_from(j.at("set")),
      j.at("coefficients").get<std::vector<double>>(), j.at("gamma").get<double>());
}

template <class F>
auto guarded(std::string_view what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  } catch (const std::logic_error& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  } catch (const NumericalError& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string_view map_format_version() { return kFormat; }

std::string to_json(const MultiIndexSet& set) { return set_json(set).dump(); }

MultiIndexSet multi_index_set_from_json(std::string_view text) {
  return guarded("invalid multi-index set", [&] { return set_from(json::parse(text)); });
}

std::string to_json(const SquaredPolyDensity& density) { return density_json(density).dump(); }

std::shared_ptr<const SquaredPolyDensity> density_from_json(std::string_view text) {
  return guarded("invalid density", [&] { return density_from(json::parse(text)); });
}

std::string to_json(const ComposedMap& map) {
  json base = json::array();
  for (const auto& m : map.base_maps()) base.push_back(map_json(m));
  json layers = json::array();
  for (std::size_t i = 0; i < map.num_layers(); ++i) {
    const auto& l = map.layer(i);
    layers.push_back({{"beta", l.beta},
                      {"fit_error", l.fit_error},
                      {"hellinger_estimate", l.hellinger_estimate},
                      {"n_evals", l.n_evals},
                      {"ordering", l.map->ordering()},
                      {"density", density_json(l.map->density())}});
  }
  json j = {{"format", std::string(kFormat)},
            {"family", std::string(to_string(map.family()))},
            {"dim", map.dim()},
            {"base_maps", std::move(base)},
            {"layers", std::move(layers)}};
  return j.dump(1);
}

ComposedMap composed_map_from_json(std::string_view text) {
  return guarded("invalid map", [&] {
    const auto j = json::parse(text);
    if (j.at("format").get<std::string>() != kFormat) throw FormatError("unsupported map format");
    std::vector<DomainMap> base;
    for (const auto& m : j.at("base_maps")) base.push_back(map_from(m));
    ComposedMap t(basis_family_from_string(j.at("family").get<std::string>()), std::move(base));
    if (j.at("dim").get<int>() != t.dim()) throw FormatError("dimension does not match the base maps");
    for (const auto& l : j.at("layers")) {
      auto rho = density_from(l.at("density"));
      Layer layer;
      layer.map = std::make_shared<const KrMap>(std::move(rho), l.at("ordering").get<std::vector<int>>());
      layer.beta = l.at("beta").get<double>();
      layer.fit_error = l.at("fit_error").get<double>();
      layer.hellinger_estimate = l.at("hellinger_estimate").get<double>();
      layer.n_evals = l.at("n_evals").get<std::size_t>();
      t.push_layer(std::move(layer));
    }
    return t;
  });
}

void save_map(const ComposedMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << to_json(map) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

ComposedMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open map file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return composed_map_from_json(ss.str());
}

}  // namespace krmap
