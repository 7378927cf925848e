#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pspin/mixture.hpp"

namespace pspin {

enum class SpinDomain { Sphere, Hypercube };

std::string to_string(SpinDomain d);
SpinDomain parse_domain(const std::string& text);

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// A point of Sigma_N: on the sphere of radius sqrt(N) or in {+1,-1}^N.
struct Configuration {
  Vector values;
  SpinDomain domain = SpinDomain::Sphere;

  /// Throws DomainError when the invariant of the domain is violated.
  void validate() const;
};

/// A point of conv(Sigma_N): the ball of radius sqrt(N) or the cube [-1,1]^N.
struct Magnetization {
  Vector values;
  SpinDomain domain = SpinDomain::Sphere;

  void validate() const;
};

constexpr std::size_t kDefaultMemoryCap = std::size_t{2} << 30;  // 2 GiB

/// Reads PSPIN_MEMORY_CAP (bytes) from the environment, falling back to 2 GiB.
std::size_t memory_cap_from_env();

/// Number of non-decreasing index tuples of length k over [0,n): C(n+k-1, k).
std::size_t sorted_tuple_count(int n, int k);

/// Colex rank of a non-decreasing tuple; matches the storage order below.
std::size_t sorted_tuple_rank(const int* idx, int k);

/// Mixed p-spin Hamiltonian
///   H(x) = sum_k c_k N^{-(k-1)/2} <G^(k), x^{(x)k}>,  G^(k) i.i.d. N(0,1).
///
/// Each degree stores one coefficient per non-decreasing index tuple T: the sum
/// of G^(k) over every distinct ordering of T. H only depends on this sum, so
/// evaluation is exact while storage drops from N^k to C(N+k-1, k).
class Hamiltonian {
 public:
  struct Degree {
    int k = 0;
    double scale = 0.0;           // c_k N^{-(k-1)/2}
    std::vector<double> weights;  // colex order over sorted tuples
  };

  static Hamiltonian sample(const Mixture& mixture, int n, std::uint64_t seed, SpinDomain domain,
                            std::size_t memory_cap = memory_cap_from_env());

  /// Two copies with entrywise correlation rho: G2 = rho G1 + sqrt(1-rho^2) G'.
  static std::pair<Hamiltonian, Hamiltonian> sample_correlated(
      const Mixture& mixture, int n, std::uint64_t seed, SpinDomain domain, double rho,
      std::size_t memory_cap = memory_cap_from_env());

  /// Raw i.i.d. entry G^(k)_{flat} drawn by sample() for this seed.
  static double raw_entry(std::uint64_t seed, int k, std::uint64_t flat_index);

  double energy(const VectorRef& x) const;
  double energy_per_n(const VectorRef& x) const { return energy(x) / n_; }
  /// Degree-k component, including its c_k N^{-(k-1)/2} factor.
  double degree_energy(int k, const VectorRef& x) const;

  Vector gradient(const VectorRef& x) const;
  Matrix hessian(const VectorRef& x) const;

  /// P^perp Hess(m) P^perp with P^perp = I - m m^T / |m|^2.
  Matrix projected_hessian(const VectorRef& m) const;

  /// Tensor contraction used by message passing,
  ///   sum_k c_k N^{-(k-1)/2} W^(k){u} / (k-1)!,
  /// where W^(k) is the full permutation sum of G^(k). This coincides with the
  /// Euclidean gradient, so per-coordinate covariances follow xi'(<u,v>/N).
  Vector contract(const VectorRef& u) const;

  int n() const { return n_; }
  SpinDomain domain() const { return domain_; }
  std::uint64_t seed() const { return seed_; }
  const Mixture& mixture() const { return mixture_; }
  const std::vector<Degree>& degrees() const { return degrees_; }
  std::size_t storage_bytes() const;

  /// Binary instance dump: magic, version, mixture, N, seed, domain, then
  /// per-degree symmetrized weights as little-endian float64.
  void write_binary(std::ostream& out) const;
  static Hamiltonian read_binary(std::istream& in);

  bool operator==(const Hamiltonian& other) const;

 private:
  Hamiltonian(Mixture mixture, int n, std::uint64_t seed, SpinDomain domain)
      : mixture_(std::move(mixture)), n_(n), seed_(seed), domain_(domain) {}

  void check_dim(const VectorRef& x) const;

  Mixture mixture_;
  int n_ = 0;
  std::uint64_t seed_ = 0;
  SpinDomain domain_ = SpinDomain::Sphere;
  std::vector<Degree> degrees_;
};

namespace detail {

// Reference evaluation that walks tuples with the generic recursion for every
// degree; the production path specializes k = 2, 3.
double energy_generic(const Hamiltonian& h, const VectorRef& x);
Vector gradient_generic(const Hamiltonian& h, const VectorRef& x);
Matrix hessian_generic(const Hamiltonian& h, const VectorRef& x);

}  // namespace detail

}  // namespace pspin
