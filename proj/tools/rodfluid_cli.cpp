#include "rodfluid/cli.hpp"

int main(int argc, char** argv) { return rodfluid::run_cli(argc, argv); }
