#pragma once

#include <functional>
#include <memory>

#include "mpsphere/functional.hpp"

namespace mps {

class RhoFamily;

// Phi_rho = A - rho B as a functional.
class PhiRho : public ConstrainedFunctional {
 public:
  PhiRho(const RhoFamily& family, double rho) : family_(&family), rho_(rho) {}

  int dim() const override;
  double value(const Vec& u) const override;
  Vec gradDual(const Vec& u) const override;
  Vec hessAction(const Vec& u, const Vec& w) const override;
  Mat hessian(const Vec& u) const override;
  double holderM(double R) const override;
  double boundK(double R, double mu) const override;
  double alpha() const override;
  bool modulusInvariant() const override;

  double rho() const { return rho_; }

 private:
  const RhoFamily* family_;
  double rho_;
};

// A family A - rho B over an interval, with B >= 0 and a coercivity witness.
class RhoFamily {
 public:
  // normBound(a, mu): sup of ||u|| over S_mu intersected with {A(u) <= a}.
  using NormBound = std::function<double(double a, double mu)>;

  RhoFamily(std::shared_ptr<const ConstrainedFunctional> A, std::shared_ptr<const ConstrainedFunctional> B,
            double rhoMin, double rhoMax, NormBound normBound, bool modulusInvariant = false);

  const ConstrainedFunctional& A() const { return *A_; }
  const ConstrainedFunctional& B() const { return *B_; }
  double rhoMin() const { return rhoMin_; }
  double rhoMax() const { return rhoMax_; }
  bool modulusInvariant() const { return modulusInvariant_; }
  double normBound(double a, double mu) const { return normBound_(a, mu); }

  PhiRho at(double rho) const { return PhiRho(*this, rho); }

 private:
  std::shared_ptr<const ConstrainedFunctional> A_;
  std::shared_ptr<const ConstrainedFunctional> B_;
  double rhoMin_;
  double rhoMax_;
  NormBound normBound_;
  bool modulusInvariant_;
};

}  // namespace mps
