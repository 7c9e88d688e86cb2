#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "coevo/seeding.hpp"

namespace coevo {

enum class Activation : std::uint8_t { Tansig = 0, Logsig = 1 };

std::string_view to_string(Activation a);

struct HiddenLayer {
  int size = 0;  // 0 means the layer is inactive
  Activation activation = Activation::Tansig;
  friend bool operator==(const HiddenLayer&, const HiddenLayer&) = default;
};

/// Dimensions of the joint feature x topology search space.
struct SearchSpace {
  int feature_count = 68;  // n_f
  int max_layers = 2;      // n_l
  int max_layer_size = 128;

  int size_bits() const;  // bits per layer size field (8 for 128)
  int genome_length() const { return feature_count + max_layers * (size_bits() + 1); }
  friend bool operator==(const SearchSpace&, const SearchSpace&) = default;
};

/// Fixed-length bit vector: feature mask, then per layer an MSB-first size
/// field followed by one activation bit (0 tansig, 1 logsig).
class Genome {
 public:
  Genome() = default;
  explicit Genome(std::size_t length) : bits_(length, 0) {}
  explicit Genome(std::vector<std::uint8_t> bits);

  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool v) { bits_[i] = v ? 1 : 0; }
  void flip(std::size_t i) { bits_[i] ^= 1; }
  std::size_t count_ones() const;
  std::uint64_t hash() const;
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  /// MSB-first packing, zero-padded to a whole nibble.
  std::string to_hex() const;
  static Genome from_hex(std::string_view hex, std::size_t length);

  friend bool operator==(const Genome&, const Genome&) = default;
  friend auto operator<=>(const Genome&, const Genome&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

struct DecodedArchitecture {
  std::vector<int> features;        // sorted selected feature indices
  std::vector<HiddenLayer> layers;  // always max_layers entries

  std::vector<HiddenLayer> active_layers() const;
  friend bool operator==(const DecodedArchitecture&, const DecodedArchitecture&) = default;
};

/// Decodes (with repair): empty feature set -> bit (hash mod n_f) set; all
/// layer sizes zero -> first layer size 1. Throws EncodingError on wrong length.
DecodedArchitecture decode(const Genome& genome, const SearchSpace& space = {});
/// Throws RangeError for sizes above max_layer_size or bad feature indices.
Genome encode(const DecodedArchitecture& arch, const SearchSpace& space = {});
/// Applies the decode repair rule to the genome bits themselves.
Genome repair(const Genome& genome, const SearchSpace& space = {});
/// encode(decode(g)): one representative per distinct architecture.
Genome canonical(const Genome& genome, const SearchSpace& space = {});

enum class ComplexityMode { Literal, Normalized };

std::string_view to_string(ComplexityMode m);
ComplexityMode complexity_mode_from_string(std::string_view s);

/// (1/3)[|X|/n_f + active_layers/n_l + sum(s_k)/s_max]; Normalized divides
/// the last term by n_l so the value stays in [0, 1].
double complexity(const DecodedArchitecture& arch, const SearchSpace& space = {},
                  ComplexityMode mode = ComplexityMode::Literal);

Genome random_genome(std::size_t length, Rng& rng);
/// Independent bit flips with probability `rate`.
Genome mutate(const Genome& genome, double rate, Rng& rng);

std::string architecture_json(const DecodedArchitecture& arch, const SearchSpace& space, ComplexityMode mode);

}  // namespace coevo
