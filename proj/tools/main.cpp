#include "mgredist/cli.hpp"

int main(int argc, char** argv) { return mgredist::run_cli(argc, argv); }
