#include "kernbound/cli.hpp"

int main(int argc, char** argv) { return kernbound::run_cli(argc, argv); }
