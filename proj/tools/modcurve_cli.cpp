#include "modcurve/cli.hpp"

int main(int argc, char** argv) { return modcurve::cli::run_cli(argc, argv); }
