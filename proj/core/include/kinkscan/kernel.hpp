#ifndef KINKSCAN_KERNEL_HPP
#define KINKSCAN_KERNEL_HPP

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kinkscan/rational.hpp"

namespace kinkscan {

struct KernelCheck {
    std::string name;
    double value;     // residual that should vanish
    double tolerance;
    bool pass;
};

struct KernelVerification {
    std::vector<KernelCheck> checks;
    bool pass;
};

// Compactly supported polynomial detection kernel of order k (smoothness
// s = 2k+1). Coefficients are exact rationals; floating point enters only at
// evaluation time, so the moment and boundary identities can be checked
// exactly. Immutable after construction.
class KinkKernel {
public:
    // Supported orders: 1..6. Throws errc::invalid_argument for k < 1.
    static KinkKernel build(int order);

    int order() const { return order_; }
    int smoothness() const { return 2 * order_ + 1; } // s = 2k+1
    const Rational& normalizer() const { return normalizer_; }

    // Dense exact coefficients of K_deriv by power of x, deriv in 0..3.
    const std::vector<Rational>& coefficients(int deriv) const;

    // K_deriv(x); exactly zero outside [-1,1].
    double eval(int deriv, double x) const;

    // Exact moment integral over [-1,1] of x^j K_deriv(x), by termwise
    // polynomial integration.
    Rational moment_exact(int deriv, int j) const;
    double moment(int deriv, int j) const { return moment_exact(deriv, j).to_double(); }

    // Exact integral over [-1,1] of K_deriv(x)^2.
    Rational squared_integral_exact(int deriv) const;
    double squared_integral(int deriv) const { return squared_integral_exact(deriv).to_double(); }

    // Largest c in (0,1) with |K_1(tau)| >= |K_2(0)| * |tau| / 2 for all
    // |tau| <= c; dense scan at step 1e-4, cached at construction. Gives a
    // concrete region where the separation lower bound is testable.
    double separation_constant() const { return separation_constant_; }

    // Boundary conditions K_i(+-1)=0 (i=1..3), K_1(0)=0, and vanishing
    // moments of K_3 for j = 0..2k, each reported at tolerance tol.
    KernelVerification verify(double tol) const;

    // Copy with coefficients(0)[power] shifted by normalizer*delta and the
    // derivatives recomputed. Used to exercise verification failure paths.
    KinkKernel perturbed(int power, const Rational& delta) const;

private:
    KinkKernel() = default;
    void differentiate_and_finalize();

    int order_ = 0;
    Rational normalizer_;
    std::array<std::vector<Rational>, 4> coeff_;  // exact, by power
    std::array<std::vector<double>, 4> coeffd_;   // evaluation copies
    double separation_constant_ = 0.0;
};

// Smoothed-third-derivative oracle pieces at one point t.
struct KappaOracle {
    double kappa;        // h^-4 * integral of K_3((x-t)/h) mu_F(x) dx over [0,1]
    double localisation; // sum over kinks of h^-2 K_1((lambda-t)/h) * jump
    double remainder;    // kappa - localisation
};

// A kink of mu_F in rank scale: location lambda in (0,1) and the jump of the
// first derivative of mu_F there.
struct KinkPoint {
    double location;
    double jump;
};

// Quadrature oracle for kappa_h(t, mu_F). mu_F must be evaluable on [0,1];
// the integrand is split at each kink so each piece is smooth. Requires
// h in (0, 1/2) and t in (h, 1-h).
KappaOracle kappa_oracle(const KinkKernel& kernel,
                         const std::function<double(double)>& mu_f,
                         std::span<const KinkPoint> kinks,
                         double h, double t, double quad_tol);

} // namespace kinkscan

#endif
