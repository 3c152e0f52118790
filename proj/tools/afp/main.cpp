#include "cli.hpp"

int main(int argc, char** argv) { return afp::cli::main(argc, argv); }
