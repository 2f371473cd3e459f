#include "culture_probe/cli/app.hpp"

int main(int argc, char** argv) { return cprobe::cli::runApp(argc, argv); }
