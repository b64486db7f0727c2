#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hji/model.hpp"

namespace hji {

/// Names accepted by make_builtin_model.
std::vector<std::string> builtin_model_names();

/// Constructs a shipped model by name. `dimension` 0 keeps the model's
/// default; only "example-2.2" accepts dimension 2.
///
///   example-2.2   a = I, b = -x/max(|x|,1) (1 + u1 u2 / 2), bounded cost
///   example-2.3   d = 1, a = 1, b = -sgn(x) x^2 + u2, u2 in {0, 1/2, 1}, bounded cost
///   example-2.5   d = 1, a = 1, b = -x + (u2 - u1)/2, cost 0.1 |x| (1 + u1 (1 - u2))
///   ou-benchmark  d = 1, a = 1, b = -x, c = 0.375 x^2, no controls
///   game-1d       d = 1, a = 1, b = -2 sgn(x) max(|x|,1) + u1 - u2,
///                 c = 0.3 (1 - e^{-|x|}) (1 + u1 (1 - u2))
///
/// Throws ConfigurationError for unknown names.
GameModel make_builtin_model(std::string_view name, int dimension = 0);

/// The reference Lyapunov certificate shipped with a built-in model, for the
/// given dimension (0: the model's default).
std::optional<LyapunovCertificate> builtin_certificate(std::string_view name, int dimension = 0);

/// e^{|x|} for |x| >= 1 and its C^2 even-polynomial continuation e (1 + |x|^2) / 2 inside.
double exp_radial_lyapunov(std::span<const double> x);

}  // namespace hji
