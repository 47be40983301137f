#pragma once

// Line protocol between the engine and an out-of-process simulator.
//
//   engine -> sim            sim -> engine
//   RESET <u64 decimal>      OK
//   NEXT                     OK
//   EVAL <observable>        <decimal float, 17 significant digits>
//   QUIT                     (process exits 0)
//
// Newline-delimited UTF-8, one command in flight. A simulator answers a
// malformed command with "ERR <reason>" and keeps serving; an unknown
// observable is reported as "ERR unknown observable".

#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace smc {

class Simulator;

namespace protocol {

/// %.17g: round-trips every finite double.
std::string formatReal(double value);

/// Strict decimal parse of a whole line; nullopt on any trailing junk.
std::optional<double> parseReal(std::string_view line);

/// Handle one command line, returning the reply line (without newline), or
/// nullopt for QUIT. Never throws.
std::optional<std::string> handleCommand(Simulator& sim, std::string_view line);

/// Serve commands from `in` to `out` until QUIT or EOF.
void serve(Simulator& sim, std::FILE* in, std::FILE* out);

}  // namespace protocol
}  // namespace smc
