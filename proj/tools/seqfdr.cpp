#include "seqfdr/cli.hpp"

int main(int argc, char** argv) { return seqfdr::cli::main(argc, argv); }
