#include "warpfill/cli.hpp"

int main(int argc, char** argv) { return warpfill::cli::main(argc, argv); }
