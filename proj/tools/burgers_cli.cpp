#include "burgers/cli.hpp"

int main(int argc, char** argv) { return burgers::cli_main(argc, argv); }
