#include "mgrt/cli.hpp"

int main(int argc, char** argv) { return mgrt::run_cli(argc, argv); }
