#include "optoweak/runner.hpp"

int main(int argc, char** argv) { return optoweak::run_command(argc, argv); }
