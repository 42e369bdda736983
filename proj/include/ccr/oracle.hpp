#ifndef CCR_ORACLE_HPP
#define CCR_ORACLE_HPP

#include "ccr/bachelier.hpp"
#include "ccr/model.hpp"
#include "ccr/quadrature.hpp"
#include "ccr/structures.hpp"

namespace ccr {

// Independent semi-analytic ground truth for the zero-correlation reference
// model: 1-D/2-D adaptive quadrature over the Gaussian/exponential building
// blocks. All entry points reject configs with market/credit correlation.

// (1-R_d) Int_0^T e^{-rt} lambda_d e^{-lambda_d t} E[(M_t(defaulter))^-] dt.
double ucva_quadrature(const ModelConfig& config, Direction dir = Direction::BtoC,
                       const QuadratureOptions& opt = {});

// As above with the survivor's extra survival factor e^{-lambda_s t}.
double ftdcva_quadrature(const ModelConfig& config, Direction dir = Direction::BtoC,
                         const QuadratureOptions& opt = {});

// Portable-CVA correction: outer integral over the trigger density times the
// Gaussian law of the survivor's mark, inner conditional unilateral value.
// Direction CtoB prices Gamma(C,B) (trigger at tau_B).
double gamma_quadrature(const ModelConfig& config, CloseoutRule rule,
                        Direction dir = Direction::CtoB);

} // namespace ccr

#endif
