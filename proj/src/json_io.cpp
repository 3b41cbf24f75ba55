#include <nsdim/errors.hpp>
#include <nsdim/json_io.hpp>

namespace nsdim {

Json to_json(const SeedSpec& seed) {
  return Json{{"master_seed", seed.master_seed}, {"stream_index", seed.stream_index}, {"prng", kRngAlgorithm}};
}

SeedSpec seed_from_json(const Json& j) {
  if (j.contains("prng") && j.at("prng").get<std::string>() != kRngAlgorithm) {
    throw ArgumentError("seed uses PRNG '" + j.at("prng").get<std::string>() + "', this build provides '" +
                        std::string(kRngAlgorithm) + "'");
  }
  return SeedSpec{j.at("master_seed").get<std::uint64_t>(), j.at("stream_index").get<std::uint64_t>()};
}

Json to_json(const Box& box) { return Json{{"lo", box.lo}, {"hi", box.hi}}; }

Box box_from_json(const Json& j) {
  return Box{j.at("lo").get<std::vector<double>>(), j.at("hi").get<std::vector<double>>()};
}

Json to_json(const NetworkSpec& network) {
  Json layers = Json::array();
  for (const auto& l : network.layers) {
    layers.push_back(Json{{"width", l.width}, {"bound", l.bound}, {"activation", l.activation.name()}});
  }
  return Json{{"input_dim", network.input_dim}, {"seed", to_json(network.seed)}, {"layers", layers}};
}

NetworkSpec network_from_json(const Json& j) {
  NetworkSpec net;
  net.input_dim = j.at("input_dim").get<int>();
  net.seed = seed_from_json(j.at("seed"));
  for (const auto& l : j.at("layers")) {
    net.layers.push_back(LayerSpec{l.at("width").get<std::size_t>(), l.at("bound").get<double>(),
                                   Activation::from_name(l.at("activation").get<std::string>())});
  }
  net.validate();
  return net;
}

Json grid_header_json(const InputGrid& grid) {
  return Json{{"mode", to_string(grid.mode)},
              {"size", grid.size()},
              {"dim", grid.dim()},
              {"domain", to_json(grid.domain)},
              {"seed", to_json(grid.seed)}};
}

}  // namespace nsdim
