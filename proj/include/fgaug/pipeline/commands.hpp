#pragma once

#include <exception>
#include <iosfwd>

namespace fgaug::pipeline {

// Exit codes of the command-line front end.
enum ExitCode { kOk = 0, kValidation = 1, kIo = 2, kNumeric = 3 };

// Maps a caught exception to its exit code.
int exit_code_for(const std::exception& e);

// Entry point of the fgaug tool. Errors are printed to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fgaug::pipeline
