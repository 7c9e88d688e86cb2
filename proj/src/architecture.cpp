#include "coevo/architecture.hpp"

#include <algorithm>
#include <bit>
#include <json.hpp>

#include "coevo/errors.hpp"

namespace coevo {

std::string_view to_string(Activation a) { return a == Activation::Tansig ? "tansig" : "logsig"; }

int SearchSpace::size_bits() const {
  return static_cast<int>(std::bit_width(static_cast<unsigned>(max_layer_size)));
}

Genome::Genome(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t Genome::count_ones() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::uint64_t Genome::hash() const { return fnv1a(bits_); }

std::string Genome::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve((bits_.size() + 3) / 4);
  for (std::size_t i = 0; i < bits_.size(); i += 4) {
    unsigned nib = 0;
    for (std::size_t k = 0; k < 4; ++k) nib = (nib << 1) | (i + k < bits_.size() ? bits_[i + k] : 0u);
    out.push_back(kDigits[nib]);
  }
  return out;
}

Genome Genome::from_hex(std::string_view hex, std::size_t length) {
  if (hex.size() != (length + 3) / 4) {
    throw EncodingError("hex genome of length " + std::to_string(hex.size()) + " cannot hold " +
                        std::to_string(length) + " bits");
  }
  Genome g(length);
  for (std::size_t i = 0; i < hex.size(); ++i) {
    const char c = hex[i];
    unsigned nib;
    if (c >= '0' && c <= '9') nib = static_cast<unsigned>(c - '0');
    else if (c >= 'a' && c <= 'f') nib = static_cast<unsigned>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') nib = static_cast<unsigned>(c - 'A' + 10);
    else throw EncodingError(std::string("invalid hex digit '") + c + "'");
    for (std::size_t k = 0; k < 4; ++k) {
      const bool bit = (nib >> (3 - k)) & 1u;
      const std::size_t pos = i * 4 + k;
      if (pos < length) g.set(pos, bit);
      else if (bit) throw EncodingError("non-zero padding bits in hex genome");
    }
  }
  return g;
}

std::vector<HiddenLayer> DecodedArchitecture::active_layers() const {
  std::vector<HiddenLayer> out;
  for (const auto& l : layers) {
    if (l.size > 0) out.push_back(l);
  }
  return out;
}

namespace {

void check_length(const Genome& g, const SearchSpace& space) {
  if (g.size() != static_cast<std::size_t>(space.genome_length())) {
    throw EncodingError("genome has " + std::to_string(g.size()) + " bits, expected " +
                        std::to_string(space.genome_length()));
  }
}

std::size_t layer_offset(const SearchSpace& space, int k) {
  return static_cast<std::size_t>(space.feature_count + k * (space.size_bits() + 1));
}

}  // namespace

DecodedArchitecture decode(const Genome& genome, const SearchSpace& space) {
  check_length(genome, space);
  DecodedArchitecture arch;
  for (int i = 0; i < space.feature_count; ++i) {
    if (genome[static_cast<std::size_t>(i)]) arch.features.push_back(i);
  }
  if (arch.features.empty()) {
    arch.features.push_back(static_cast<int>(genome.hash() % static_cast<std::uint64_t>(space.feature_count)));
  }
  const int bits = space.size_bits();
  for (int k = 0; k < space.max_layers; ++k) {
    const std::size_t off = layer_offset(space, k);
    int raw = 0;
    for (int b = 0; b < bits; ++b) raw = (raw << 1) | (genome[off + static_cast<std::size_t>(b)] ? 1 : 0);
    HiddenLayer layer;
    layer.size = std::min(raw, space.max_layer_size);
    layer.activation = genome[off + static_cast<std::size_t>(bits)] ? Activation::Logsig : Activation::Tansig;
    arch.layers.push_back(layer);
  }
  if (std::all_of(arch.layers.begin(), arch.layers.end(), [](const HiddenLayer& l) { return l.size == 0; })) {
    arch.layers.front().size = 1;
  }
  return arch;
}

Genome encode(const DecodedArchitecture& arch, const SearchSpace& space) {
  if (arch.layers.size() != static_cast<std::size_t>(space.max_layers)) {
    throw RangeError("architecture must list exactly " + std::to_string(space.max_layers) + " layers");
  }
  Genome g(static_cast<std::size_t>(space.genome_length()));
  for (int f : arch.features) {
    if (f < 0 || f >= space.feature_count) throw RangeError("feature index out of range: " + std::to_string(f));
    g.set(static_cast<std::size_t>(f), true);
  }
  const int bits = space.size_bits();
  for (int k = 0; k < space.max_layers; ++k) {
    const auto& layer = arch.layers[static_cast<std::size_t>(k)];
    if (layer.size < 0 || layer.size > space.max_layer_size) {
      throw RangeError("layer size " + std::to_string(layer.size) + " outside [0, " +
                       std::to_string(space.max_layer_size) + "]");
    }
    const std::size_t off = layer_offset(space, k);
    for (int b = 0; b < bits; ++b) {
      g.set(off + static_cast<std::size_t>(b), (layer.size >> (bits - 1 - b)) & 1);
    }
    g.set(off + static_cast<std::size_t>(bits), layer.activation == Activation::Logsig);
  }
  return g;
}

Genome repair(const Genome& genome, const SearchSpace& space) {
  check_length(genome, space);
  Genome g = genome;
  bool any_feature = false;
  for (int i = 0; i < space.feature_count && !any_feature; ++i) any_feature = g[static_cast<std::size_t>(i)];
  if (!any_feature) g.set(genome.hash() % static_cast<std::uint64_t>(space.feature_count), true);

  const int bits = space.size_bits();
  bool any_layer = false;
  for (int k = 0; k < space.max_layers && !any_layer; ++k) {
    const std::size_t off = layer_offset(space, k);
    for (int b = 0; b < bits; ++b) any_layer = any_layer || g[off + static_cast<std::size_t>(b)];
  }
  if (!any_layer) g.set(layer_offset(space, 0) + static_cast<std::size_t>(bits - 1), true);
  return g;
}

Genome canonical(const Genome& genome, const SearchSpace& space) { return encode(decode(genome, space), space); }

std::string_view to_string(ComplexityMode m) { return m == ComplexityMode::Literal ? "literal" : "normalized"; }

ComplexityMode complexity_mode_from_string(std::string_view s) {
  if (s == "literal") return ComplexityMode::Literal;
  if (s == "normalized") return ComplexityMode::Normalized;
  throw std::invalid_argument("unknown complexity mode '" + std::string(s) + "'");
}

double complexity(const DecodedArchitecture& arch, const SearchSpace& space, ComplexityMode mode) {
  const double feature_term = static_cast<double>(arch.features.size()) / space.feature_count;
  double active = 0, size_term = 0;
  for (const auto& l : arch.layers) {
    if (l.size != 0) active += 1;
    size_term += static_cast<double>(l.size) / space.max_layer_size;
  }
  if (mode == ComplexityMode::Normalized) size_term /= space.max_layers;
  return (feature_term + active / space.max_layers + size_term) / 3.0;
}

Genome random_genome(std::size_t length, Rng& rng) {
  Genome g(length);
  for (std::size_t i = 0; i < length; ++i) g.set(i, bernoulli(rng, 0.5));
  return g;
}

Genome mutate(const Genome& genome, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("mutation rate must lie in [0, 1]");
  Genome g = genome;
  if (rate == 0.0) return g;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (rate == 1.0 || bernoulli(rng, rate)) g.flip(i);
  }
  return g;
}

std::string architecture_json(const DecodedArchitecture& arch, const SearchSpace& space, ComplexityMode mode) {
  nlohmann::json j;
  j["features"] = arch.features;
  j["layers"] = nlohmann::json::array();
  for (const auto& l : arch.layers) j["layers"].push_back({{"size", l.size}, {"activation", to_string(l.activation)}});
  j["complexity"] = complexity(arch, space, mode);
  return j.dump();
}

}  // namespace coevo
