// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return scenid::cli::run(args, std::cout, std::cerr);
}
