#ifndef SMCCHEES_TYPES_HPP
#define SMCCHEES_TYPES_HPP

#include <Eigen/Dense>

namespace smcchees {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace smcchees

#endif
