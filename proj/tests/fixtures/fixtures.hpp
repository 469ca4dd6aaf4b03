#pragma once

// Seeded panels shipped under tests/data. make_fixtures writes them and the
// unit tests check that the shipped bytes still match.

#include "panelms/simulate.hpp"

#include <string>
#include <vector>

namespace fixtures {

struct Fixture {
    std::string file;
    panelms::DgpSpec spec;
};

inline panelms::CoefficientFunction flat(double level) {
    using panelms::Curve;
    using panelms::CurveTerm;
    return panelms::CoefficientFunction{{Curve{{CurveTerm::constant(level)}}, Curve{{CurveTerm::linear(0.5, -0.5)}}}};
}

/// N = 4, T = 200: unit 3 carries an intercept bump of height 1.5 on [0.4, 0.6].
inline Fixture planted() {
    panelms::DgpSpec spec;
    spec.N = 4;
    spec.T = 200;
    spec.D = 2;
    spec.unit_curves.assign(4, flat(1.0));
    spec.unit_curves[2].coords[0] =
        spec.unit_curves[2].coords[0].plus(panelms::CurveTerm::bump(0.5, 0.1, 1.5, 0.05));
    spec.ar = 0.3;
    spec.sigma = 0.5;
    spec.seed = 20240601;
    return {"planted.csv", spec};
}

/// N = 2, T = 200: the intercepts differ by 1.5 everywhere.
inline Fixture distinct2() {
    panelms::DgpSpec spec;
    spec.N = 2;
    spec.T = 200;
    spec.D = 2;
    spec.unit_curves = {flat(0.0), flat(1.5)};
    spec.ar = 0.3;
    spec.sigma = 0.5;
    spec.seed = 20240602;
    return {"distinct2.csv", spec};
}

inline std::vector<Fixture> all() { return {planted(), distinct2()}; }

}  // namespace fixtures
