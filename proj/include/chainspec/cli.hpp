#pragma once

namespace chainspec {

// Entry point behind the chainspec binary: generate | embed | fit | evaluate,
// each driven by a JSON run configuration. Returns the process exit code:
// 0 success, 1 validation error, 2 IO error.
int run_cli(int argc, char** argv);

}  // namespace chainspec
