// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "gqml/cli.hpp"

int main(int argc, char** argv) { return gqml::cli::run(argc, argv, std::cout, std::cerr); }
