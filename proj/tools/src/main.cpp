#include <cstdio>
#include <exception>

#include "CLI11.hpp"
#include "commands.hpp"
#include "vhem/errors.hpp"

// Exit codes: 0 success, 1 invalid input or usage, 2 numerical failure.
int main(int argc, char** argv) {
  CLI::App app{"Variational hierarchical EM for mixtures of hidden Markov models", "vhem"};
  app.require_subcommand(1);
  vhem::cli::register_commands(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const vhem::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const vhem::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
