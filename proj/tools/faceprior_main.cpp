#include "faceprior/cli.hpp"

int main(int argc, char** argv) { return faceprior::cli::run(argc, argv); }
