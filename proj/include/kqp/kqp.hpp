#ifndef KQP_KQP_HPP
#define KQP_KQP_HPP

#include "kqp/sparse.hpp"
#include "kqp/spd_factor.hpp"
#include "kqp/qp_model.hpp"
#include "kqp/kkt_oracle.hpp"
#include "kqp/admm_operator.hpp"
#include "kqp/krylov.hpp"
#include "kqp/anderson.hpp"
#include "kqp/driver.hpp"

#endif  // KQP_KQP_HPP
