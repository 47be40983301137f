#include "smc/engine/engine.hpp"

int main(int argc, char** argv) { return smc::engine::cliMain(argc, argv); }
