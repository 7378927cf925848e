#include "pspin/hamiltonian.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <istream>
#include <ostream>

#include "pspin/errors.hpp"
#include "pspin/rng.hpp"

namespace pspin {

namespace {

constexpr int kMaxStoredDegree = 8;
constexpr char kMagic[8] = {'P', 'S', 'P', 'I', 'N', 'H', 'A', 'M'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint64_t kIndependentTag = 0x1d9e7ULL;

using Tuple = std::array<int, kMaxStoredDegree>;

// Colex successor over non-decreasing tuples; returns false past the end.
bool next_sorted_tuple(Tuple& idx, int k, int n) {
  for (int p = 0; p < k; ++p) {
    const int cap = (p == k - 1) ? n - 1 : idx[p + 1];
    if (idx[p] < cap) {
      ++idx[p];
      for (int q = 0; q < p; ++q) idx[q] = 0;
      return true;
    }
  }
  return false;
}

template <typename Visitor>
void for_each_sorted_tuple(int n, int k, Visitor&& visit) {
  Tuple idx{};
  std::size_t rank = 0;
  do {
    visit(idx, rank++);
  } while (next_sorted_tuple(idx, k, n));
}

double binomial_u(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0.0;
  double b = 1.0;
  for (std::uint64_t j = 1; j <= k; ++j) b = b * static_cast<double>(n - k + j) / static_cast<double>(j);
  return b;
}

std::uint64_t key_for_degree(std::uint64_t seed, int k) { return derive_key(seed, {static_cast<std::uint64_t>(k)}); }

std::vector<double> sample_weights(std::uint64_t key, int n, int k) {
  std::vector<double> w(sorted_tuple_count(n, k), 0.0);
  for_each_sorted_tuple(n, k, [&](const Tuple& idx, std::size_t rank) {
    Tuple perm = idx;
    double sum = 0.0;
    do {
      std::uint64_t flat = 0;
      for (int p = 0; p < k; ++p) flat = flat * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(perm[p]);
      sum += CounterRng::normal(key, flat);
    } while (std::next_permutation(perm.begin(), perm.begin() + k));
    w[rank] = sum;
  });
  return w;
}

void check_memory(const Mixture& mixture, int n, std::size_t memory_cap) {
  std::size_t total = 0;
  for (int k : mixture.active_degrees()) {
    if (k > kMaxStoredDegree) throw DomainError("degree " + std::to_string(k) + " exceeds storable degree 8");
    const double count = binomial_u(static_cast<std::uint64_t>(n) + k - 1, k);
    const double bytes = count * sizeof(double);
    if (bytes + static_cast<double>(total) > static_cast<double>(memory_cap)) {
      throw ResourceError("degree " + std::to_string(k) + " at N=" + std::to_string(n) + " requires " +
                          std::to_string(static_cast<unsigned long long>(bytes)) +
                          " bytes of tensor storage; memory cap is " + std::to_string(memory_cap) + " bytes");
    }
    total += static_cast<std::size_t>(bytes);
  }
}

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!in) throw DomainError("truncated Hamiltonian dump");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

std::string to_string(SpinDomain d) { return d == SpinDomain::Sphere ? "sphere" : "hypercube"; }

SpinDomain parse_domain(const std::string& text) {
  if (text == "sphere" || text == "spherical") return SpinDomain::Sphere;
  if (text == "hypercube" || text == "ising" || text == "cube") return SpinDomain::Hypercube;
  throw DomainError("unknown spin domain '" + text + "' (expected sphere|hypercube)");
}

void Configuration::validate() const {
  const double n = static_cast<double>(values.size());
  if (domain == SpinDomain::Sphere) {
    if (std::fabs(values.squaredNorm() - n) > 1e-8 * n) throw DomainError("configuration is not on the sphere of radius sqrt(N)");
  } else {
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (values[i] != 1.0 && values[i] != -1.0) throw DomainError("hypercube configuration entries must be +-1");
    }
  }
}

void Magnetization::validate() const {
  const double n = static_cast<double>(values.size());
  if (domain == SpinDomain::Sphere) {
    if (values.squaredNorm() > n * (1.0 + 1e-8)) throw DomainError("magnetization lies outside the ball of radius sqrt(N)");
  } else {
    if (values.size() > 0 && values.cwiseAbs().maxCoeff() > 1.0) throw DomainError("magnetization entries must lie in [-1,1]");
  }
}

std::size_t memory_cap_from_env() {
  if (const char* env = std::getenv("PSPIN_MEMORY_CAP")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultMemoryCap;
}

std::size_t sorted_tuple_count(int n, int k) {
  return static_cast<std::size_t>(std::llround(binomial_u(static_cast<std::uint64_t>(n) + k - 1, k)));
}

std::size_t sorted_tuple_rank(const int* idx, int k) {
  std::size_t rank = 0;
  for (int j = 0; j < k; ++j) {
    rank += static_cast<std::size_t>(std::llround(binomial_u(static_cast<std::uint64_t>(idx[j] + j), j + 1)));
  }
  return rank;
}

double Hamiltonian::raw_entry(std::uint64_t seed, int k, std::uint64_t flat_index) {
  return CounterRng::normal(key_for_degree(seed, k), flat_index);
}

Hamiltonian Hamiltonian::sample(const Mixture& mixture, int n, std::uint64_t seed, SpinDomain domain,
                                std::size_t memory_cap) {
  if (n < 2) throw DomainError("Hamiltonian dimension N must be >= 2");
  check_memory(mixture, n, memory_cap);
  Hamiltonian h(mixture, n, seed, domain);
  for (int k : mixture.active_degrees()) {
    Degree d;
    d.k = k;
    d.scale = mixture.coeff(k) * std::pow(static_cast<double>(n), -(k - 1) / 2.0);
    d.weights = sample_weights(key_for_degree(seed, k), n, k);
    h.degrees_.push_back(std::move(d));
  }
  return h;
}

std::pair<Hamiltonian, Hamiltonian> Hamiltonian::sample_correlated(const Mixture& mixture, int n, std::uint64_t seed,
                                                                   SpinDomain domain, double rho,
                                                                   std::size_t memory_cap) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("correlation rho must lie in [0,1]");
  Hamiltonian first = sample(mixture, n, seed, domain, memory_cap);
  Hamiltonian second = first;
  if (rho == 1.0) return {std::move(first), std::move(second)};
  const double orth = std::sqrt(1.0 - rho * rho);
  const std::uint64_t indep_seed = derive_key(seed, {kIndependentTag});
  for (auto& d : second.degrees_) {
    // symmetrization is linear, so mixing symmetrized sums mixes the raw tensors
    const std::vector<double> fresh = sample_weights(key_for_degree(indep_seed, d.k), n, d.k);
    for (std::size_t i = 0; i < d.weights.size(); ++i) d.weights[i] = rho * d.weights[i] + orth * fresh[i];
  }
  return {std::move(first), std::move(second)};
}

void Hamiltonian::check_dim(const VectorRef& x) const {
  if (x.size() != n_) {
    throw DomainError("vector of length " + std::to_string(x.size()) + " does not match N=" + std::to_string(n_));
  }
}

std::size_t Hamiltonian::storage_bytes() const {
  std::size_t total = 0;
  for (const auto& d : degrees_) total += d.weights.size() * sizeof(double);
  return total;
}

namespace {

double degree_energy_impl(const Hamiltonian::Degree& d, int n, const VectorRef& x) {
  const double* w = d.weights.data();
  double total = 0.0;
  if (d.k == 2) {
    std::size_t r = 0;
    for (int j = 0; j < n; ++j) {
      double inner = 0.0;
      for (int i = 0; i <= j; ++i) inner += w[r++] * x[i];
      total += inner * x[j];
    }
  } else if (d.k == 3) {
    std::size_t r = 0;
    for (int c = 0; c < n; ++c) {
      double mid = 0.0;
      for (int b = 0; b <= c; ++b) {
        double inner = 0.0;
        for (int a = 0; a <= b; ++a) inner += w[r++] * x[a];
        mid += inner * x[b];
      }
      total += mid * x[c];
    }
  } else {
    for_each_sorted_tuple(n, d.k, [&](const Tuple& idx, std::size_t rank) {
      double prod = w[rank];
      for (int p = 0; p < d.k; ++p) prod *= x[idx[p]];
      total += prod;
    });
  }
  return d.scale * total;
}

void gradient_generic_impl(const Hamiltonian::Degree& d, int n, const VectorRef& x, Vector& g) {
  const int k = d.k;
  Vector acc = Vector::Zero(n);
  for_each_sorted_tuple(n, k, [&](const Tuple& idx, std::size_t rank) {
    std::array<double, kMaxStoredDegree + 1> prefix{}, suffix{};
    prefix[0] = 1.0;
    for (int p = 0; p < k; ++p) prefix[p + 1] = prefix[p] * x[idx[p]];
    suffix[k] = 1.0;
    for (int p = k - 1; p >= 0; --p) suffix[p] = suffix[p + 1] * x[idx[p]];
    const double w = d.weights[rank];
    for (int p = 0; p < k; ++p) acc[idx[p]] += w * prefix[p] * suffix[p + 1];
  });
  g += d.scale * acc;
}

void hessian_generic_impl(const Hamiltonian::Degree& d, int n, const VectorRef& x, Matrix& hess) {
  const int k = d.k;
  Matrix acc = Matrix::Zero(n, n);
  for_each_sorted_tuple(n, k, [&](const Tuple& idx, std::size_t rank) {
    const double w = d.weights[rank];
    for (int p = 0; p < k; ++p) {
      for (int q = 0; q < k; ++q) {
        if (p == q) continue;
        double prod = w;
        for (int r = 0; r < k; ++r) {
          if (r != p && r != q) prod *= x[idx[r]];
        }
        acc(idx[p], idx[q]) += prod;
      }
    }
  });
  hess += d.scale * acc;
}

void gradient_impl(const Hamiltonian::Degree& d, int n, const VectorRef& x, Vector& g) {
  const double* w = d.weights.data();
  if (d.k == 2) {
    Vector acc = Vector::Zero(n);
    std::size_t r = 0;
    for (int j = 0; j < n; ++j) {
      double inner = 0.0;
      const double xj = x[j];
      for (int i = 0; i <= j; ++i) {
        const double wij = w[r++];
        inner += wij * x[i];
        acc[i] += wij * xj;
      }
      acc[j] += inner;
    }
    g += d.scale * acc;
  } else if (d.k == 3) {
    Vector acc = Vector::Zero(n);
    std::size_t r = 0;
    for (int c = 0; c < n; ++c) {
      const double xc = x[c];
      for (int b = 0; b <= c; ++b) {
        const double xb = x[b];
        const double xbc = xb * xc;
        double inner = 0.0;
        for (int a = 0; a <= b; ++a) {
          const double wabc = w[r++];
          inner += wabc * x[a];
          acc[a] += wabc * xbc;
        }
        acc[b] += inner * xc;
        acc[c] += inner * xb;
      }
    }
    g += d.scale * acc;
  } else {
    gradient_generic_impl(d, n, x, g);
  }
}

void hessian_impl(const Hamiltonian::Degree& d, int n, const VectorRef& x, Matrix& hess) {
  const double* w = d.weights.data();
  if (d.k == 2) {
    Matrix acc = Matrix::Zero(n, n);
    std::size_t r = 0;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i <= j; ++i) {
        const double wij = w[r++];
        acc(i, j) += wij;
        acc(j, i) += wij;
      }
    }
    hess += d.scale * acc;
  } else if (d.k == 3) {
    // accumulate the upper triangle (row <= col), then mirror
    Matrix acc = Matrix::Zero(n, n);
    std::size_t r = 0;
    for (int c = 0; c < n; ++c) {
      const double xc = x[c];
      for (int b = 0; b <= c; ++b) {
        const double xb = x[b];
        double inner = 0.0;
        for (int a = 0; a <= b; ++a) {
          const double wabc = w[r++];
          inner += wabc * x[a];
          // pairs (a,b) and (a,c) with a <= b <= c
          acc(a, b) += wabc * xc;
          acc(a, c) += wabc * xb;
        }
        acc(b, c) += inner;
      }
    }
    Matrix upper = acc.triangularView<Eigen::StrictlyUpper>();
    Matrix sym = upper + upper.transpose();
    sym.diagonal() = 2.0 * acc.diagonal();
    hess += d.scale * sym;
  } else {
    hessian_generic_impl(d, n, x, hess);
  }
}

}  // namespace

double Hamiltonian::energy(const VectorRef& x) const {
  check_dim(x);
  double total = 0.0;
  for (const auto& d : degrees_) total += degree_energy_impl(d, n_, x);
  return total;
}

double Hamiltonian::degree_energy(int k, const VectorRef& x) const {
  check_dim(x);
  for (const auto& d : degrees_) {
    if (d.k == k) return degree_energy_impl(d, n_, x);
  }
  return 0.0;
}

Vector Hamiltonian::gradient(const VectorRef& x) const {
  check_dim(x);
  Vector g = Vector::Zero(n_);
  for (const auto& d : degrees_) gradient_impl(d, n_, x, g);
  return g;
}

Matrix Hamiltonian::hessian(const VectorRef& x) const {
  check_dim(x);
  Matrix hess = Matrix::Zero(n_, n_);
  for (const auto& d : degrees_) hessian_impl(d, n_, x, hess);
  return hess;
}

Matrix Hamiltonian::projected_hessian(const VectorRef& m) const {
  check_dim(m);
  const double norm2 = m.squaredNorm();
  if (!(norm2 > 0.0)) throw DomainError("projected Hessian needs a nonzero magnetization");
  const Matrix hess = hessian(m);
  const Vector hm = hess * m;
  const double mhm = m.dot(hm);
  // (I - P) H (I - P) with P = m m^T / |m|^2
  Matrix out = hess;
  out.noalias() -= (m * hm.transpose()) / norm2;
  out.noalias() -= (hm * m.transpose()) / norm2;
  out.noalias() += (mhm / (norm2 * norm2)) * (m * m.transpose());
  return 0.5 * (out + out.transpose());
}

Vector Hamiltonian::contract(const VectorRef& u) const { return gradient(u); }

void Hamiltonian::write_binary(std::ostream& out) const {
  out.write(kMagic, sizeof(kMagic));
  write_le<std::uint32_t>(out, kFormatVersion);
  const std::string mix = mixture_.to_string();
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(mix.size()));
  out.write(mix.data(), static_cast<std::streamsize>(mix.size()));
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(n_));
  write_le<std::uint64_t>(out, seed_);
  write_le<std::uint8_t>(out, domain_ == SpinDomain::Sphere ? 0 : 1);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(degrees_.size()));
  for (const auto& d : degrees_) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.k));
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(d.weights.size()));
    for (double w : d.weights) write_le<double>(out, w);
  }
}

Hamiltonian Hamiltonian::read_binary(std::istream& in) {
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw DomainError("not a Hamiltonian dump (bad magic)");
  const auto version = read_le<std::uint32_t>(in);
  if (version != kFormatVersion) throw DomainError("unsupported Hamiltonian dump version " + std::to_string(version));
  const auto mix_len = read_le<std::uint32_t>(in);
  std::string mix(mix_len, '\0');
  in.read(mix.data(), mix_len);
  if (!in) throw DomainError("truncated Hamiltonian dump");
  const auto n = static_cast<int>(read_le<std::uint64_t>(in));
  const auto seed = read_le<std::uint64_t>(in);
  const auto dom = read_le<std::uint8_t>(in);
  Hamiltonian h(Mixture::parse(mix), n, seed, dom == 0 ? SpinDomain::Sphere : SpinDomain::Hypercube);
  const auto ndeg = read_le<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < ndeg; ++i) {
    Degree d;
    d.k = static_cast<int>(read_le<std::uint32_t>(in));
    const auto count = read_le<std::uint64_t>(in);
    if (count != sorted_tuple_count(n, d.k)) throw DomainError("Hamiltonian dump has inconsistent degree size");
    d.scale = h.mixture_.coeff(d.k) * std::pow(static_cast<double>(n), -(d.k - 1) / 2.0);
    d.weights.resize(count);
    for (auto& w : d.weights) w = read_le<double>(in);
    h.degrees_.push_back(std::move(d));
  }
  return h;
}

bool Hamiltonian::operator==(const Hamiltonian& other) const {
  if (n_ != other.n_ || domain_ != other.domain_ || degrees_.size() != other.degrees_.size()) return false;
  for (std::size_t i = 0; i < degrees_.size(); ++i) {
    if (degrees_[i].k != other.degrees_[i].k || degrees_[i].scale != other.degrees_[i].scale ||
        degrees_[i].weights != other.degrees_[i].weights) {
      return false;
    }
  }
  return true;
}

namespace detail {

double energy_generic(const Hamiltonian& h, const VectorRef& x) {
  double total = 0.0;
  for (const auto& d : h.degrees()) {
    double s = 0.0;
    for_each_sorted_tuple(h.n(), d.k, [&](const Tuple& idx, std::size_t rank) {
      double prod = d.weights[rank];
      for (int p = 0; p < d.k; ++p) prod *= x[idx[p]];
      s += prod;
    });
    total += d.scale * s;
  }
  return total;
}

Vector gradient_generic(const Hamiltonian& h, const VectorRef& x) {
  Vector g = Vector::Zero(h.n());
  for (const auto& d : h.degrees()) gradient_generic_impl(d, h.n(), x, g);
  return g;
}

Matrix hessian_generic(const Hamiltonian& h, const VectorRef& x) {
  Matrix hess = Matrix::Zero(h.n(), h.n());
  for (const auto& d : h.degrees()) hessian_generic_impl(d, h.n(), x, hess);
  return hess;
}

}  // namespace detail

}  // namespace pspin
