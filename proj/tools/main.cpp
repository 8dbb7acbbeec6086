// SPDX-License-Identifier: Apache-2.0

#include "ribsim/cli_io.hpp"

int main(int argc, char** argv) { return ribsim::run_cli(argc, argv); }
