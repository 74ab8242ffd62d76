// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "adseval/cli.hpp"

int main(int argc, char** argv) { return adseval::cli::run(argc, argv, std::cout, std::cerr); }
