#include "cli.hpp"

int main(int argc, char** argv) { return sparselab::cli::run(argc, argv); }
