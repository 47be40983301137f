// Serves a built-in model over the simulator wire protocol, on stdio or on
// a TCP port (one connection at a time).

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <csignal>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "smc/error.hpp"
#include "smc/models/registry.hpp"
#include "smc/sim/protocol.hpp"

namespace {

int serveTcp(smc::Simulator& sim, std::uint16_t port, bool once) {
    const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listener < 0) {
        std::perror("socket");
        return 1;
    }
    int yes = 1;
    ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listener, 4) != 0) {
        std::perror("bind/listen");
        ::close(listener);
        return 1;
    }
    socklen_t len = sizeof addr;
    ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
    std::printf("listening %u\n", static_cast<unsigned>(ntohs(addr.sin_port)));
    std::fflush(stdout);
    do {
        const int conn = ::accept(listener, nullptr, nullptr);
        if (conn < 0) continue;
        std::FILE* in = ::fdopen(conn, "r");
        std::FILE* out = ::fdopen(::dup(conn), "w");
        smc::protocol::serve(sim, in, out);
        std::fclose(in);
        std::fclose(out);
    } while (!once);
    ::close(listener);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app("smc-model-server: a built-in model behind the simulator wire protocol");
    smc::models::ModelSpec spec;
    std::vector<std::string> params;
    std::optional<std::uint16_t> port;
    bool once = false;
    app.add_option("--model", spec.name, "built-in model name");
    app.add_option("--model-param", params, "model parameter k=v (repeatable)");
    app.add_option("--listen", port, "serve TCP on 127.0.0.1:<port> (0 picks a free port) instead of stdio");
    app.add_flag("--once", once, "with --listen: exit after the first connection closes");
    CLI11_PARSE(app, argc, argv);

    try {
        for (const auto& p : params) {
            const auto eq = p.find('=');
            if (eq == std::string::npos) throw smc::ConfigError("--model-param expects k=v, got '" + p + "'");
            spec.params[p.substr(0, eq)] = p.substr(eq + 1);
        }
        auto binding = smc::models::bindModel(spec);
        auto sim = binding.factory();
        std::signal(SIGPIPE, SIG_IGN);
        if (port) return serveTcp(*sim, *port, once);
        smc::protocol::serve(*sim, stdin, stdout);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
