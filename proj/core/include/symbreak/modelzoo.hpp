#pragma once

#include <string>

#include "symbreak/model.hpp"

namespace symbreak {

/// Charged spherical pendulum: a bob of mass `mass` on a rod of length
/// `length`, with a like charge fixed at depth `charge_depth` below the
/// pivot. The ring of equilibria exists when the effective radial balance
/// cos(theta*) = (l^2 + d^2 - (kappa d / (m g))^{2/3}) / (2 l d) lies in
/// (-1, 1); construction rejects parameters violating it. The symmetry is
/// broken by sliding the charge to (eps * offset_scale, 0, -charge_depth).
struct PendulumParams {
  double mass = 1.0;
  double length = 1.0;
  double gravity = 1.0;
  double coulomb = 2.0 * 1.4142135623730951;  // kappa = q^2/(4 pi eps0), = 2 sqrt(2)
  double charge_depth = 1.0;
  double offset_scale = 0.05;
};

/// Chart (theta, phi, p_theta, p_phi) with canonical form and domain
/// sin(theta) > 0; n = 1, J = p_phi, action shifts phi.
Model make_pendulum(const PendulumParams& p = {});

enum class OscillatorCoupling {
  DiagonalInvariant,  // eps * (q1 q2 + p1 p2): preserves the diagonal circle
  FullBreak,          // eps * (c1 q1 + c2 q2): preserves nothing
};

struct OscillatorParams {
  OscillatorCoupling coupling = OscillatorCoupling::DiagonalInvariant;
  double c1 = 1.0;
  double c2 = 0.7;
};

/// Two uncoupled nonlinear oscillators: H_0 = (I1^2 + I2^2)/2 with
/// I_j = (q_j^2 + p_j^2)/2, momentum (I1, I2), action rotating each plane;
/// chart (q1, q2, p1, p2), domain I1 > 0 and I2 > 0.
Model make_oscillator(const OscillatorParams& p = {});

/// Config-file text for the bundled models (same formulas routed through
/// the expression parser; used for autodiff cross-checks and as documented
/// examples of the model file format).
std::string pendulum_config(const PendulumParams& p = {});
std::string oscillator_config(const OscillatorParams& p = {});

struct ParsedModel {
  Model model;
  /// Structural validation of the parsed model; failures are warnings, the
  /// model is still usable so problems can be debugged.
  ValidationReport validation;
};

/// Builds a Model from config text (JSON with sections chart / torus /
/// hamiltonian / params; see README for the grammar). First derivatives of
/// all expressions come from dual-number evaluation; Hessians fall back to
/// finite differences. Throws expr::ParseError or std::invalid_argument on
/// malformed input.
ParsedModel parse_model(const std::string& config_text);

/// parse_model on the contents of a file.
ParsedModel load_model_file(const std::string& path);

}  // namespace symbreak
