// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include "codol/cli.hpp"

int main(int argc, char** argv) {
    return codol::cli::run(argc, argv);
}
