#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hartree/grid.hpp"

namespace hartree {

enum class PotentialForm {
    SaturatingPower,  // g(x) = min(|x|^p, 1)
    RationalPower,    // g(x) = |x|^p / (1 + |x|^p)
    LimitPower,       // V(x) = |x|^p (unbounded; limit problem only)
    Tabulated,
};

// Steep-well potential family.  All built-in analytic forms are radial with
// g(0) = 0 the unique minimum.
struct Potential {
    PotentialForm form = PotentialForm::SaturatingPower;
    double p = 2.0;
    std::optional<Field> table;  // Tabulated only

    bool bounded() const { return form != PotentialForm::LimitPower; }
    bool analytic() const { return form != PotentialForm::Tabulated; }
    // p <= 2 makes 1-g fall outside L^{d/2} for RationalPower (any d >= 3);
    // such potentials are constructed but flagged.
    bool one_minus_g_integrable(int d) const;

    double eval_radial(double r) const;            // analytic forms
    double eval(const std::vector<double>& x) const;  // analytic forms
};

Potential make_potential(PotentialForm form, double p);
Potential make_tabulated(const Field& samples);
PotentialForm potential_form_from_string(const std::string& s);
std::string to_string(PotentialForm f);

// Samples the potential on a grid (Tabulated requires matching grid).
Field potential_on_grid(const Potential& g, const GridSpec& grid);

struct ValidationReport {
    bool range_ok = false;        // 0 <= g <= 1 at all samples
    bool unique_minimum = false;  // argmin over grid is the origin cell only
    bool m2_ratio_ok = false;     // g/|x|^p in [0.9, 1.1] near the origin
    bool bounded_form = true;     // fails for LimitPower
    std::string detail;
    bool all_ok() const {
        return range_ok && unique_minimum && m2_ratio_ok && bounded_form;
    }
};

// Checks the steep-well assumptions on grid samples.  The ratio window is
// h <= |x| <= 10h restricted to where g <= 1/2, since the power-law regime
// only extends until the well saturates.
ValidationReport validate_m1_m2(const Potential& g, const GridSpec& grid);

// ||1-g||_{d/2} = (int (1-g)^{d/2})^{2/d}.  Closed form for the analytic
// families (Beta integrals), tail-checked grid quadrature for Tabulated.
// Returns +infinity for non-integrable families.
double one_minus_g_norm(const Potential& g, int d);

// int (1-g) u^2 with u a radial profile (analytic radial forms only).
double one_minus_g_weighted_mass(const Potential& g,
                                 const class RadialField& u);

}  // namespace hartree
