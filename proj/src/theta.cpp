#include "mmar/theta.hpp"

#include <cmath>

#include "mmar/error.hpp"

namespace mmar {

namespace {

ParamLayout build_layout(const MmarSpec& spec, bool constrained) {
  spec.validate();
  const Index m = spec.m;
  const Index n = spec.n;
  const Index drop = constrained ? 1 : 0;
  ParamLayout lay;
  Index pos = 0;
  for (int k = 0; k < spec.K(); ++k) {
    BlockLayout b;
    b.begin = pos;
    for (int i = 0; i < spec.orders[static_cast<std::size_t>(k)]; ++i) {
      b.a.push_back(pos);
      pos += m * m;
      b.b.push_back(pos);
      pos += n * n - drop;
    }
    b.c = pos;
    pos += m * n;
    b.u = pos;
    pos += vech_size(m);
    b.v = pos;
    pos += vech_size(n) - drop;
    b.end = pos;
    lay.comps.push_back(std::move(b));
  }
  lay.alpha = pos;
  lay.size = pos + spec.K() - 1;
  return lay;
}

// Positive root of 1 - |kept|^2.
double reconstruct_leading(const Eigen::Ref<const Vector>& kept, const char* what) {
  const double radicand = 1.0 - kept.squaredNorm();
  if (!(radicand > 0.0))
    throw InvalidParameter(std::string("theta: invalid parameter, ") + what +
                           " entries have squared norm >= 1 (radicand " + std::to_string(radicand) + ")");
  return std::sqrt(radicand);
}

}  // namespace

ParamLayout ParamLayout::theta(const MmarSpec& spec) { return build_layout(spec, true); }
ParamLayout ParamLayout::gamma(const MmarSpec& spec) { return build_layout(spec, false); }

std::vector<Index> ParamLayout::xi(int k) const {
  const auto& b = comps.at(static_cast<std::size_t>(k));
  std::vector<Index> out;
  for (Index i = b.begin; i < b.u; ++i) out.push_back(i);
  return out;
}

Index param_dim(const MmarSpec& spec) {
  spec.validate();
  const Index m = spec.m;
  const Index n = spec.n;
  Index dim = spec.K() - 1 + spec.K() * m * n;
  for (int p : spec.orders) dim += p * (m * m + n * n - 1) + vech_size(m) + vech_size(n) - 1;
  return dim;
}

Index gamma_dim(const MmarSpec& spec) { return ParamLayout::gamma(spec).size; }

Vector pack_component_gamma(const MmarComponent& comp, Index m, Index n) {
  const Index p = static_cast<Index>(comp.A.size());
  Vector out(p * (m * m + n * n) + m * n + vech_size(m) + vech_size(n));
  Index pos = 0;
  for (Index i = 0; i < p; ++i) {
    out.segment(pos, m * m) = vec(comp.A[static_cast<std::size_t>(i)]);
    pos += m * m;
    out.segment(pos, n * n) = vec(comp.B[static_cast<std::size_t>(i)]);
    pos += n * n;
  }
  out.segment(pos, m * n) = vec(comp.C);
  pos += m * n;
  out.segment(pos, vech_size(m)) = vech(SpdMatrix(comp.U).inverse());
  pos += vech_size(m);
  out.segment(pos, vech_size(n)) = vech(SpdMatrix(comp.V).inverse());
  return out;
}

Vector pack_gamma(const MmarModel& model) {
  model.validate();
  const auto lay = ParamLayout::gamma(model.spec);
  Vector g(lay.size);
  for (int k = 0; k < model.spec.K(); ++k) {
    const auto& b = lay.comps[static_cast<std::size_t>(k)];
    g.segment(b.begin, b.end - b.begin) =
        pack_component_gamma(model.components[static_cast<std::size_t>(k)], model.spec.m, model.spec.n);
  }
  for (int k = 0; k + 1 < model.spec.K(); ++k) g(lay.alpha + k) = model.alphas[static_cast<std::size_t>(k)];
  return g;
}

MmarModel unpack_gamma(const Vector& g, const MmarSpec& spec) {
  const auto lay = ParamLayout::gamma(spec);
  if (g.size() != lay.size) throw DimensionError("unpack_gamma: vector has the wrong length");
  const Index m = spec.m;
  const Index n = spec.n;
  MmarModel model;
  model.spec = spec;
  double rest = 1.0;
  for (int k = 0; k < spec.K(); ++k) {
    const auto& b = lay.comps[static_cast<std::size_t>(k)];
    MmarComponent c;
    for (std::size_t i = 0; i < b.a.size(); ++i) {
      c.A.push_back(mat(g.segment(b.a[i], m * m), m, m));
      c.B.push_back(mat(g.segment(b.b[i], n * n), n, n));
    }
    c.C = mat(g.segment(b.c, m * n), m, n);
    const Matrix u_inv = unvech(g.segment(b.u, vech_size(m)));
    const Matrix v_inv = unvech(g.segment(b.v, vech_size(n)));
    try {
      c.U = SpdMatrix(u_inv).inverse();
      c.V = SpdMatrix(v_inv).inverse();
    } catch (const InvalidParameter&) {
      throw InvalidParameter("unpack: precision matrix of component " + std::to_string(k + 1) +
                             " is not positive definite");
    }
    model.components.push_back(std::move(c));
    if (k + 1 < spec.K()) {
      model.alphas.push_back(g(lay.alpha + k));
      rest -= g(lay.alpha + k);
    } else {
      model.alphas.push_back(rest);
    }
  }
  return model;
}

Vector theta_to_gamma(const ThetaVector& theta) {
  const auto& spec = theta.spec;
  const auto tl = ParamLayout::theta(spec);
  const auto gl = ParamLayout::gamma(spec);
  if (theta.values.size() != tl.size) throw DimensionError("theta: vector length differs from param_dim");
  const Index m = spec.m;
  const Index n = spec.n;
  const Vector& t = theta.values;
  Vector g(gl.size);
  for (std::size_t k = 0; k < tl.comps.size(); ++k) {
    const auto& tb = tl.comps[k];
    const auto& gb = gl.comps[k];
    for (std::size_t i = 0; i < tb.a.size(); ++i) {
      g.segment(gb.a[i], m * m) = t.segment(tb.a[i], m * m);
      const auto kept = t.segment(tb.b[i], n * n - 1);
      g(gb.b[i]) = reconstruct_leading(kept, "B");
      g.segment(gb.b[i] + 1, n * n - 1) = kept;
    }
    g.segment(gb.c, m * n) = t.segment(tb.c, m * n);
    g.segment(gb.u, vech_size(m)) = t.segment(tb.u, vech_size(m));
    const auto kept_v = t.segment(tb.v, vech_size(n) - 1);
    g(gb.v) = reconstruct_leading(kept_v, "vech(V^-1)");
    g.segment(gb.v + 1, vech_size(n) - 1) = kept_v;
  }
  g.tail(spec.K() - 1) = t.tail(spec.K() - 1);
  return g;
}

ThetaVector pack_theta(const MmarModel& model) {
  const Vector g = pack_gamma(model);
  const auto tl = ParamLayout::theta(model.spec);
  const auto gl = ParamLayout::gamma(model.spec);
  const Index m = model.spec.m;
  const Index n = model.spec.n;
  ThetaVector out{Vector(tl.size), model.spec};
  for (std::size_t k = 0; k < tl.comps.size(); ++k) {
    const auto& tb = tl.comps[k];
    const auto& gb = gl.comps[k];
    for (std::size_t i = 0; i < tb.a.size(); ++i) {
      if (!(g(gb.b[i]) > 0.0))
        throw InvalidParameter("pack_theta: component " + std::to_string(k + 1) + " lag " +
                               std::to_string(i + 1) +
                               ": leading entry of B must be strictly positive (normalize the model first)");
      out.values.segment(tb.a[i], m * m) = g.segment(gb.a[i], m * m);
      out.values.segment(tb.b[i], n * n - 1) = g.segment(gb.b[i] + 1, n * n - 1);
    }
    out.values.segment(tb.c, m * n) = g.segment(gb.c, m * n);
    out.values.segment(tb.u, vech_size(m)) = g.segment(gb.u, vech_size(m));
    out.values.segment(tb.v, vech_size(n) - 1) = g.segment(gb.v + 1, vech_size(n) - 1);
  }
  out.values.tail(model.spec.K() - 1) = g.tail(model.spec.K() - 1);
  return out;
}

MmarModel unpack_theta(const ThetaVector& theta) { return unpack_gamma(theta_to_gamma(theta), theta.spec); }

Matrix theta_jacobian(const ThetaVector& theta) {
  const auto& spec = theta.spec;
  const auto tl = ParamLayout::theta(spec);
  const auto gl = ParamLayout::gamma(spec);
  const Vector g = theta_to_gamma(theta);
  const Index m = spec.m;
  const Index n = spec.n;
  Matrix j = Matrix::Zero(gl.size, tl.size);
  auto identity = [&](Index grow, Index tcol, Index len) {
    for (Index i = 0; i < len; ++i) j(grow + i, tcol + i) = 1.0;
  };
  auto constrained = [&](Index grow, Index tcol, Index len_kept) {
    const double lead = g(grow);
    for (Index i = 0; i < len_kept; ++i) j(grow, tcol + i) = -theta.values(tcol + i) / lead;
    identity(grow + 1, tcol, len_kept);
  };
  for (std::size_t k = 0; k < tl.comps.size(); ++k) {
    const auto& tb = tl.comps[k];
    const auto& gb = gl.comps[k];
    for (std::size_t i = 0; i < tb.a.size(); ++i) {
      identity(gb.a[i], tb.a[i], m * m);
      constrained(gb.b[i], tb.b[i], n * n - 1);
    }
    identity(gb.c, tb.c, m * n);
    identity(gb.u, tb.u, vech_size(m));
    constrained(gb.v, tb.v, vech_size(n) - 1);
  }
  identity(gl.alpha, tl.alpha, spec.K() - 1);
  return j;
}

}  // namespace mmar
