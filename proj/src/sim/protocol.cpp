#include "smc/sim/protocol.hpp"

#include <charconv>
#include <cstdlib>
#include <string>

#include "smc/error.hpp"
#include "smc/sim/simulator.hpp"

namespace smc::protocol {

std::string formatReal(double value) {
    char buf[64];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", value);
    return std::string(buf, static_cast<std::size_t>(len));
}

std::optional<double> parseReal(std::string_view line) {
    if (line.empty()) return std::nullopt;
    const std::string owned(line);
    char* end = nullptr;
    const double value = std::strtod(owned.c_str(), &end);
    if (end == owned.c_str() || *end != '\0') return std::nullopt;
    return value;
}

std::optional<std::string> handleCommand(Simulator& sim, std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto space = line.find(' ');
    const std::string_view verb = line.substr(0, space);
    const std::string_view arg = space == std::string_view::npos ? std::string_view{} : line.substr(space + 1);
    try {
        if (verb == "QUIT") return std::nullopt;
        if (verb == "NEXT") {
            if (!arg.empty()) return "ERR NEXT takes no argument";
            sim.next();
            return "OK";
        }
        if (verb == "RESET") {
            std::uint64_t seed = 0;
            auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), seed);
            if (arg.empty() || ec != std::errc() || ptr != arg.data() + arg.size())
                return "ERR RESET needs a decimal u64 seed";
            sim.reset(seed);
            return "OK";
        }
        if (verb == "EVAL") {
            if (arg.empty()) return "ERR EVAL needs an observable name";
            return formatReal(sim.eval(arg));
        }
        if (verb == "EVALN") return "ERR EVALN is reserved";
        return "ERR unknown command";
    } catch (const UnknownObservableError&) {
        return "ERR unknown observable";
    } catch (const std::exception& e) {
        std::string reason = e.what();
        for (char& ch : reason)
            if (ch == '\n' || ch == '\r') ch = ' ';
        return "ERR " + reason;
    }
}

void serve(Simulator& sim, std::FILE* in, std::FILE* out) {
    std::string line;
    int ch;
    for (;;) {
        line.clear();
        while ((ch = std::fgetc(in)) != EOF && ch != '\n') line.push_back(static_cast<char>(ch));
        if (ch == EOF && line.empty()) return;
        const auto reply = handleCommand(sim, line);
        if (!reply) return;
        std::fputs(reply->c_str(), out);
        std::fputc('\n', out);
        std::fflush(out);
        if (ch == EOF) return;
    }
}

}  // namespace smc::protocol
