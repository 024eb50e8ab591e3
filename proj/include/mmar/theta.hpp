#pragma once

// Flat parameter vectors.
//
// gamma (unconstrained): per component
//   vec(A_1), vec(B_1), ..., vec(A_p), vec(B_p), vec(C), vech(U^{-1}), vech(V^{-1})
// followed by alpha_1..alpha_{K-1}.
//
// theta (identified): the same, except that the first entry of every vec(B_i)
// and of vech(V^{-1}) is dropped. The dropped entries are recovered from the
// unit-norm constraints as the positive square root of 1 - (sum of squares of
// the kept entries); alpha_K = 1 - sum of the others.

#include <vector>

#include "mmar/model.hpp"

namespace mmar {

struct BlockLayout {
  std::vector<Index> a;  // offset of vec(A_i)
  std::vector<Index> b;  // offset of vec(B_i) or vec°(B_i)
  Index c = 0;
  Index u = 0;
  Index v = 0;
  Index begin = 0;
  Index end = 0;
};

struct ParamLayout {
  std::vector<BlockLayout> comps;
  Index alpha = 0;  // offset of alpha_1
  Index size = 0;

  static ParamLayout theta(const MmarSpec& spec);
  static ParamLayout gamma(const MmarSpec& spec);

  // Indices of (vec A, vec° B, ..., vec C) of component k: the joint
  // confidence-region block of that component.
  std::vector<Index> xi(int k) const;
};

Index param_dim(const MmarSpec& spec);
Index gamma_dim(const MmarSpec& spec);

struct ThetaVector {
  Vector values;
  MmarSpec spec;
};

// Requires a normalized model with nonzero leading entry in every B.
ThetaVector pack_theta(const MmarModel& model);
// Throws InvalidParameter when a reconstruction radicand is not positive or
// the reconstructed precision matrices are not positive definite.
MmarModel unpack_theta(const ThetaVector& theta);

Vector pack_gamma(const MmarModel& model);
MmarModel unpack_gamma(const Vector& gamma, const MmarSpec& spec);
// Component-only gamma block (used for deterministic tie-breaking).
Vector pack_component_gamma(const MmarComponent& comp, Index m, Index n);

Vector theta_to_gamma(const ThetaVector& theta);
// d gamma / d theta^T, gamma_dim x param_dim.
Matrix theta_jacobian(const ThetaVector& theta);

}  // namespace mmar
