#include "gbboost/cli.hpp"

int main(int argc, char** argv) { return gbb::run_cli(argc, argv); }
