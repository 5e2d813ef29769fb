#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "semigroup_lab/core.hpp"

namespace semigroup_lab::catalog {

enum class Family { zero, diagonal, jordan, rotation, random_stable, transport_shift, heat_laplacian };

inline constexpr Family kAllFamilies[] = {Family::zero,          Family::diagonal,        Family::jordan,
                                          Family::rotation,      Family::random_stable,   Family::transport_shift,
                                          Family::heat_laplacian};

inline const char* to_string(Family f) {
  switch (f) {
    case Family::zero: return "zero";
    case Family::diagonal: return "diagonal";
    case Family::jordan: return "jordan";
    case Family::rotation: return "rotation";
    case Family::random_stable: return "random_stable";
    case Family::transport_shift: return "transport_shift";
    case Family::heat_laplacian: return "heat_laplacian";
  }
  return "?";
}

inline Family parse_family(std::string_view name) {
  for (Family f : kAllFamilies)
    if (name == to_string(f)) return f;
  throw InputError("unknown catalog family '" + std::string(name) + "'");
}

struct CatalogSpec {
  Family family = Family::zero;
  int dim = 1;
  std::vector<double> params;
  std::uint64_t seed = 0;
};

/// Seeded randomness. Stream discipline: one std::mt19937_64 (a fully specified engine)
/// per seed; uniforms take the top 53 bits; normals come from the Marsaglia polar method
/// in pairs, and matrices are filled row-major, one normal per entry.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  Matrix gaussian_matrix(Eigen::Index n, double scale = 1.0) {
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) m(i, j) = scale * gaussian();
    return m;
  }

  Vector gaussian_vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(gaussian(), gaussian());
    return v;
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline constexpr double kDefaultStabilityShift = 0.5;

/// Independent sub-stream seed (splitmix64 finalizer over seed and stream index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Real Gaussian matrix with entries of standard deviation scale / sqrt(dim).
inline LinearOperator gaussian_operator(int dim, double scale, std::uint64_t seed) {
  if (dim < 1) throw InputError("dim must be >= 1");
  Rng rng(seed);
  return LinearOperator(rng.gaussian_matrix(dim, scale / std::sqrt(static_cast<double>(dim))));
}

inline LinearOperator build(const CatalogSpec& spec) {
  if (spec.dim < 1) throw InputError("catalog dim must be >= 1");
  const Eigen::Index n = spec.dim;
  const double nd = static_cast<double>(n);
  Matrix m = Matrix::Zero(n, n);
  std::ostringstream label;
  label << "catalog:" << to_string(spec.family) << ":" << spec.dim;
  switch (spec.family) {
    case Family::zero:
      break;
    case Family::diagonal:
      if (static_cast<Eigen::Index>(spec.params.size()) != n)
        throw InputError("diagonal family needs exactly dim eigenvalue params");
      for (Eigen::Index i = 0; i < n; ++i) m(i, i) = spec.params[static_cast<std::size_t>(i)];
      break;
    case Family::jordan:
      if (spec.params.empty()) throw InputError("jordan family needs the eigenvalue param");
      for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = spec.params[0];
        if (i + 1 < n) m(i, i + 1) = 1.0;
      }
      break;
    case Family::rotation:
      if (spec.params.empty()) throw InputError("rotation family needs the angle param");
      for (Eigen::Index i = 0; i + 1 < n; i += 2) {
        m(i, i + 1) = -spec.params[0];
        m(i + 1, i) = spec.params[0];
      }
      break;
    case Family::random_stable: {
      double delta = spec.params.empty() ? kDefaultStabilityShift : spec.params[0];
      Rng rng(spec.seed);
      m = rng.gaussian_matrix(n, 1.0 / std::sqrt(nd));
      double abscissa = spectrum(LinearOperator(m)).spectral_abscissa;
      m.diagonal().array() -= abscissa + delta;
      break;
    }
    case Family::transport_shift:
      // Periodic upwind difference for u_t + u_x = 0 on dim points, mesh width 1/dim.
      for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) -= nd;
        m(i, (i + n - 1) % n) += nd;
      }
      break;
    case Family::heat_laplacian:
      for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = -2.0 * nd * nd;
        if (i > 0) m(i, i - 1) = nd * nd;
        if (i + 1 < n) m(i, i + 1) = nd * nd;
      }
      break;
  }
  return LinearOperator(std::move(m), label.str());
}

/// "catalog:family:dim[:p1,p2,...[:seed]]"
inline CatalogSpec parse_uri(std::string_view uri) {
  constexpr std::string_view prefix = "catalog:";
  if (uri.substr(0, prefix.size()) != prefix) throw InputError("not a catalog URI: " + std::string(uri));
  std::vector<std::string> fields;
  std::string rest(uri.substr(prefix.size()));
  std::size_t start = 0;
  while (true) {
    std::size_t pos = rest.find(':', start);
    fields.push_back(rest.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (fields.size() < 2 || fields.size() > 4) throw InputError("catalog URI needs family:dim[:params[:seed]]");
  CatalogSpec spec;
  spec.family = parse_family(fields[0]);
  try {
    std::size_t used = 0;
    spec.dim = std::stoi(fields[1], &used);
    if (used != fields[1].size()) throw InputError("bad dim");
    if (fields.size() >= 3 && !fields[2].empty()) {
      std::stringstream ss(fields[2]);
      std::string item;
      while (std::getline(ss, item, ',')) {
        spec.params.push_back(std::stod(item, &used));
        if (used != item.size()) throw InputError("bad param");
      }
    }
    if (fields.size() == 4 && !fields[3].empty()) {
      spec.seed = std::stoull(fields[3], &used);
      if (used != fields[3].size()) throw InputError("bad seed");
    }
  } catch (const InputError&) {
    throw InputError("malformed catalog URI: " + std::string(uri));
  } catch (const std::exception&) {
    throw InputError("malformed catalog URI: " + std::string(uri));
  }
  return spec;
}

/// Desk-scale instances covering every family at the given dimension.
inline std::vector<CatalogSpec> standard_set(int dim, std::uint64_t seed) {
  std::vector<CatalogSpec> out;
  out.push_back({Family::zero, dim, {}, 0});
  std::vector<double> diag(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) diag[static_cast<std::size_t>(i)] = (i % 2 == 0 ? -1.0 : 1.0) * (1.0 + 0.5 * i);
  out.push_back({Family::diagonal, dim, diag, 0});
  out.push_back({Family::jordan, dim, {-1.0}, 0});
  out.push_back({Family::rotation, dim, {std::numbers::pi}, 0});
  out.push_back({Family::random_stable, dim, {kDefaultStabilityShift}, seed});
  out.push_back({Family::transport_shift, dim, {}, 0});
  out.push_back({Family::heat_laplacian, dim, {}, 0});
  return out;
}

}  // namespace semigroup_lab::catalog
