#include "frfm/cli.hpp"

int main(int argc, char** argv) { return frfm::run_cli(argc, argv); }
