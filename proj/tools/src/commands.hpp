#pragma once

#include "CLI11.hpp"

namespace vhem::cli {

/// Adds every subcommand to `app`. Each subcommand runs from its CLI11
/// callback and reports failures by throwing the library's exceptions.
void register_commands(CLI::App& app);

}  // namespace vhem::cli
