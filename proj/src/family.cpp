#include "mpsphere/family.hpp"

#include <algorithm>

#include "mpsphere/errors.hpp"

namespace mps {

RhoFamily::RhoFamily(std::shared_ptr<const ConstrainedFunctional> A, std::shared_ptr<const ConstrainedFunctional> B,
                     double rhoMin, double rhoMax, NormBound normBound, bool modulusInvariant)
    : A_(std::move(A)), B_(std::move(B)), rhoMin_(rhoMin), rhoMax_(rhoMax), normBound_(std::move(normBound)),
      modulusInvariant_(modulusInvariant) {
  if (!A_ || !B_ || A_->dim() != B_->dim()) throw Error(ErrorKind::Config, "family parts must share a dimension");
  if (!(rhoMin_ <= rhoMax_)) throw Error(ErrorKind::Config, "empty rho interval");
}

int PhiRho::dim() const { return family_->A().dim(); }

double PhiRho::value(const Vec& u) const { return family_->A().value(u) - rho_ * family_->B().value(u); }

Vec PhiRho::gradDual(const Vec& u) const { return family_->A().gradDual(u) - rho_ * family_->B().gradDual(u); }

Vec PhiRho::hessAction(const Vec& u, const Vec& w) const {
  return family_->A().hessAction(u, w) - rho_ * family_->B().hessAction(u, w);
}

Mat PhiRho::hessian(const Vec& u) const { return family_->A().hessian(u) - rho_ * family_->B().hessian(u); }

double PhiRho::holderM(double R) const { return family_->A().holderM(R) + rho_ * family_->B().holderM(R); }

double PhiRho::boundK(double R, double mu) const {
  return std::max(1.0, family_->A().boundK(R, mu) + rho_ * family_->B().boundK(R, mu));
}

double PhiRho::alpha() const { return std::min(family_->A().alpha(), family_->B().alpha()); }

bool PhiRho::modulusInvariant() const { return family_->modulusInvariant(); }

}  // namespace mps
