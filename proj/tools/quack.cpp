#include "quack/cli.hpp"

int main(int argc, char** argv) { return quack::run_cli(argc, argv); }
