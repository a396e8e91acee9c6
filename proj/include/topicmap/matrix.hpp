#pragma once

#include <Eigen/Dense>

namespace topicmap {

// One row per item (document, word, topic).
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace topicmap
