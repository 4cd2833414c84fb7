#include "pmarl/nn/checkpoint.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pmarl/common/error.hpp"

namespace pmarl::nn {

namespace {

void write_values(std::ostream& out, const double* data, Eigen::Index n) {
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j) out << ' ';
    out << data[j];
  }
  out << '\n';
}

class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  std::string token() {
    std::string t;
    if (!(in_ >> t)) fail("unexpected end of file");
    return t;
  }

  long integer() {
    const std::string t = token();
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (end == t.c_str() || *end != '\0') fail("expected integer, found '" + t + "'");
    return v;
  }

  double real() {
    const std::string t = token();
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0') fail("expected number, found '" + t + "'");
    return v;
  }

  void expect(const std::string& word) {
    const std::string t = token();
    if (t != word) fail("expected '" + word + "', found '" + t + "'");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(source_ + ": malformed checkpoint: " + what);
  }

 private:
  std::istream& in_;
  std::string source_;
};

}  // namespace

void Checkpoint::add(const std::string& name, Mlp mlp) {
  if (contains(name)) throw ConfigError("duplicate checkpoint entry '" + name + "'");
  entries_.emplace_back(name, std::move(mlp));
}

void Checkpoint::add(const std::string& name, Vector values) {
  if (contains(name)) throw ConfigError("duplicate checkpoint entry '" + name + "'");
  entries_.emplace_back(name, std::move(values));
}

const Checkpoint::Value* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, v] : entries_) {
    if (n == name) return &v;
  }
  return nullptr;
}

bool Checkpoint::contains(const std::string& name) const { return find(name) != nullptr; }

const Mlp& Checkpoint::mlp(const std::string& name) const {
  const Value* v = find(name);
  if (!v || !std::holds_alternative<Mlp>(*v)) throw ConfigError("checkpoint has no network '" + name + "'");
  return std::get<Mlp>(*v);
}

const Vector& Checkpoint::vector(const std::string& name) const {
  const Value* v = find(name);
  if (!v || !std::holds_alternative<Vector>(*v)) throw ConfigError("checkpoint has no vector '" + name + "'");
  return std::get<Vector>(*v);
}

void Checkpoint::write(std::ostream& out) const {
  const auto old_flags = out.flags();
  out << "pmarl-checkpoint " << kVersion << '\n';
  out << "entries " << entries_.size() << '\n';
  out << std::hexfloat;
  for (const auto& [name, value] : entries_) {
    if (const auto* mlp = std::get_if<Mlp>(&value)) {
      const auto& sizes = mlp->layer_sizes();
      out << "mlp " << name << ' ' << sizes.size();
      for (int s : sizes) out << ' ' << s;
      out << '\n';
      for (int k = 0; k < mlp->num_layers(); ++k) {
        const auto& w = mlp->weights()[k];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
          const Eigen::RowVectorXd row = w.row(r);
          write_values(out, row.data(), row.size());
        }
        write_values(out, mlp->biases()[k].data(), mlp->biases()[k].size());
      }
    } else {
      const auto& vec = std::get<Vector>(value);
      out << "vector " << name << ' ' << vec.size() << '\n';
      write_values(out, vec.data(), vec.size());
    }
  }
  out << "end\n";
  out.flags(old_flags);
}

Checkpoint Checkpoint::read(std::istream& in, const std::string& source_name) {
  Reader r(in, source_name);
  r.expect("pmarl-checkpoint");
  const long version = r.integer();
  if (version != kVersion) r.fail("unsupported version " + std::to_string(version));
  r.expect("entries");
  const long count = r.integer();
  if (count < 0) r.fail("negative entry count");

  Checkpoint ckpt;
  for (long e = 0; e < count; ++e) {
    const std::string kind = r.token();
    const std::string name = r.token();
    if (kind == "mlp") {
      const long n_sizes = r.integer();
      if (n_sizes < 2) r.fail("network '" + name + "' needs at least two layer sizes");
      std::vector<int> sizes;
      for (long k = 0; k < n_sizes; ++k) {
        const long s = r.integer();
        if (s <= 0) r.fail("non-positive layer size in '" + name + "'");
        sizes.push_back(static_cast<int>(s));
      }
      Mlp mlp(sizes);
      for (int k = 0; k < mlp.num_layers(); ++k) {
        auto& w = mlp.weights()[k];
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
          for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = r.real();
        }
        auto& b = mlp.biases()[k];
        for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = r.real();
      }
      if (!mlp.all_finite()) r.fail("network '" + name + "' has non-finite parameters");
      ckpt.add(name, std::move(mlp));
    } else if (kind == "vector") {
      const long n = r.integer();
      if (n < 0) r.fail("negative vector length for '" + name + "'");
      Vector v(n);
      for (long i = 0; i < n; ++i) v[i] = r.real();
      ckpt.add(name, std::move(v));
    } else {
      r.fail("unknown entry kind '" + kind + "'");
    }
  }
  // The trailer catches files cut off inside the last number.
  r.expect("end");
  return ckpt;
}

void Checkpoint::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
  write(out);
  out.flush();
  if (!out) throw ConfigError("failed while writing checkpoint '" + path + "'");
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  return read(in, path);
}

}  // namespace pmarl::nn
