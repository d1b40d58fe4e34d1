#include "lightcal/cli.hpp"

int main(int argc, char** argv) { return lightcal::cli::run(argc, argv); }
