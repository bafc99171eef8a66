#pragma once

#include <Eigen/Dense>

#include <memory>
#include <vector>

#include "nbloch/laurent.hpp"

namespace nbloch {

enum class Boundary { open, periodic };

// Banded block-Toeplitz truncation of a lattice model. Blocks T_l sit on
// block diagonal l (entry (n, m) = T_{n-m}); sites are the slow index.
struct TruncatedHamiltonian {
  int N = 0;      // site count
  int bands = 1;  // block dimension
  int r = 0;      // left hop range (block units)
  int s = 0;      // right hop range
  Boundary boundary = Boundary::open;
  // hop block for offset l = -r..s, index l + r; row-major bands x bands
  std::vector<std::vector<cd>> blocks;

  int dim() const { return N * bands; }
  const cd* block(int l) const { return blocks[static_cast<size_t>(l + r)].data(); }
  Eigen::MatrixXcd to_dense() const;
};

// Common contract every spectral/skin/evolution routine is written against:
// a model is its Bloch matrix H(beta) continued off the unit circle plus the
// characteristic roots of beta^p det(H(beta) - E).
class BlochModel {
 public:
  virtual ~BlochModel() = default;

  virtual int bands() const = 0;
  virtual int left_range() const = 0;   // r, block units
  virtual int right_range() const = 0;  // s
  virtual Eigen::MatrixXcd bloch_matrix(cd beta) const = 0;
  virtual RootSet char_roots(cd E) const = 0;
  virtual Eigen::MatrixXcd hop_block(int l) const = 0;  // T_l, l in [-r, s]

  // pole order of det(H(beta) - E) at beta = 0
  int pole_order() const { return bands() * left_range(); }
  int root_count() const { return bands() * (left_range() + right_range()); }
};

class SingleBandModel : public BlochModel {
 public:
  explicit SingleBandModel(LaurentSymbol symbol) : symbol_(std::move(symbol)) {}

  const LaurentSymbol& symbol() const { return symbol_; }

  int bands() const override { return 1; }
  int left_range() const override { return symbol_.r(); }
  int right_range() const override { return symbol_.s(); }
  Eigen::MatrixXcd bloch_matrix(cd beta) const override;
  RootSet char_roots(cd E) const override;
  Eigen::MatrixXcd hop_block(int l) const override;

 private:
  LaurentSymbol symbol_;
};

// Two side-coupled Hatano-Nelson chains. Per-chain left/right hops are
// t1 +- delta_{a,b}, on-site offsets +-V, inter-chain coupling t0:
//   H(k) = sigma_0 d0 + t0 sigma_x + [V + i (delta_b - delta_a) sin k] sigma_z,
//   d0 = 2 t1 cos k - i (delta_a + delta_b) sin k.
class TwoChainModel : public BlochModel {
 public:
  TwoChainModel(double t1, double delta_a, double delta_b, double t0, double V);

  double t1() const { return t1_; }
  double delta_a() const { return da_; }
  double delta_b() const { return db_; }
  double t0() const { return t0_; }
  double V() const { return V_; }

  int bands() const override { return 2; }
  int left_range() const override { return 1; }
  int right_range() const override { return 1; }
  Eigen::MatrixXcd bloch_matrix(cd beta) const override;
  RootSet char_roots(cd E) const override;
  Eigen::MatrixXcd hop_block(int l) const override;

 private:
  double t1_, da_, db_, t0_, V_;
};

TruncatedHamiltonian build_truncated(const BlochModel& model, int N,
                                     Boundary boundary);

}  // namespace nbloch
