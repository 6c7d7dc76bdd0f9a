#include "chainspec/cli.hpp"

int main(int argc, char** argv) { return chainspec::run_cli(argc, argv); }
