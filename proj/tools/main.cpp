#include "mpsphere/cli.hpp"

int main(int argc, char** argv) { return mps::runCli(argc, argv); }
