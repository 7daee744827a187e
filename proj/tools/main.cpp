#include "varireg/cli/commands.hpp"

int main(int argc, char** argv) { return varireg::cli::run(argc, argv); }
