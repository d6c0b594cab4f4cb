// Command-line front end: train, evaluate, predict, gradcheck and synth.

#ifndef PIN_CLI_H_
#define PIN_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace pin {

// Returns the process exit status: 0 on success, nonzero on any error.
// predict reads utterances from `in` when none are given as arguments.
int run_cli(const std::vector<std::string> &args, std::istream &in, std::ostream &out, std::ostream &err);

}  // namespace pin

#endif  // PIN_CLI_H_
