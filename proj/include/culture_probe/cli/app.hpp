#pragma once

#include <iosfwd>

namespace cprobe::cli {

/// Entry point of the culture-probe executable. Returns the process exit
/// code: 0 success, 1 validation or usage error, 2 I/O error.
int runApp(int argc, char** argv);

}  // namespace cprobe::cli
