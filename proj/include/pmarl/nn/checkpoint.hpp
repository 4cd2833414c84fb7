#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "pmarl/nn/mlp.hpp"

namespace pmarl::nn {

/// Named collection of networks and plain vectors, saved as versioned text.
///
/// Layout (one token group per line, values as C99 hexadecimal floats so
/// the round trip is bit-exact):
///
///     pmarl-checkpoint 1
///     entries <count>
///     mlp <name> <n_sizes> <size_0> ... <size_last>
///     <one line per weight row, row-major>   (for each layer)
///     <one line with the layer's bias>
///     vector <name> <length>
///     <one line with the values>
///     end
class Checkpoint {
 public:
  using Value = std::variant<Mlp, Vector>;

  static constexpr int kVersion = 1;

  void add(const std::string& name, Mlp mlp);
  void add(const std::string& name, Vector values);

  bool contains(const std::string& name) const;
  /// Throws ConfigError when absent or of the wrong kind.
  const Mlp& mlp(const std::string& name) const;
  const Vector& vector(const std::string& name) const;

  const std::vector<std::pair<std::string, Value>>& entries() const { return entries_; }

  void write(std::ostream& out) const;
  static Checkpoint read(std::istream& in, const std::string& source_name = "checkpoint");

  /// Throws ConfigError when the file cannot be written or read.
  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

 private:
  const Value* find(const std::string& name) const;

  std::vector<std::pair<std::string, Value>> entries_;
};

}  // namespace pmarl::nn
