// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace codol {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
// Column-major; token sequences store one token per row.
using Mat = Eigen::MatrixXd;

// Writable flat view over a parameter tensor, used by optimizers and serializers.
struct TensorView {
    double* data;
    Index rows;
    Index cols;

    Index size() const { return rows * cols; }
};

}  // namespace codol
