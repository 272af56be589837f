// SPDX-License-Identifier: Apache-2.0
#include "ahd/cli.hpp"

int main(int argc, char** argv) { return ahd::cli::cli_main(argc, argv); }
