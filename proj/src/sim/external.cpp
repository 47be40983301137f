#include "smc/sim/external.hpp"

#include <charconv>
#include <csignal>
#include <cstring>
#include <mutex>
#include <string>
#include <unordered_map>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "smc/error.hpp"
#include "smc/sim/protocol.hpp"

namespace smc {

ExternalSimSpec ExternalSimSpec::parse(std::string_view text) {
    ExternalSimSpec spec;
    if (text.starts_with("exec:")) {
        spec.transport = Transport::Command;
        spec.command = std::string(text.substr(5));
        if (spec.command.empty()) throw ConfigError("external simulator: empty command");
        return spec;
    }
    if (text.starts_with("tcp:")) {
        spec.transport = Transport::Tcp;
        const std::string_view rest = text.substr(4);
        const auto colon = rest.rfind(':');
        if (colon == std::string_view::npos || colon == 0)
            throw ConfigError("external simulator: expected tcp:<host>:<port>");
        spec.host = std::string(rest.substr(0, colon));
        const std::string_view portText = rest.substr(colon + 1);
        auto [ptr, ec] = std::from_chars(portText.data(), portText.data() + portText.size(), spec.port);
        if (ec != std::errc() || ptr != portText.data() + portText.size() || spec.port == 0)
            throw ConfigError("external simulator: bad port '" + std::string(portText) + "'");
        return spec;
    }
    throw ConfigError("external simulator spec must start with exec: or tcp:");
}

namespace {

void ignoreSigpipe() {
    static std::once_flag once;
    std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

/// Blocking line transport over a pair of file descriptors.
class LineChannel {
public:
    LineChannel(int readFd, int writeFd, std::chrono::milliseconds timeout)
        : readFd_(readFd), writeFd_(writeFd), timeout_(timeout) {}
    LineChannel(const LineChannel&) = delete;
    LineChannel& operator=(const LineChannel&) = delete;
    ~LineChannel() { closeAll(); }

    void send(std::string_view line) {
        std::string out(line);
        out.push_back('\n');
        std::size_t sent = 0;
        while (sent < out.size()) {
            const ssize_t n = ::write(writeFd_, out.data() + sent, out.size() - sent);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw ProtocolError("write to simulator failed: " + std::string(std::strerror(errno)));
            }
            sent += static_cast<std::size_t>(n);
        }
    }

    std::string receive() {
        for (;;) {
            if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                return line;
            }
            pollfd pfd{readFd_, POLLIN, 0};
            const int ready = ::poll(&pfd, 1, static_cast<int>(timeout_.count()));
            if (ready < 0) {
                if (errno == EINTR) continue;
                throw ProtocolError("poll on simulator failed: " + std::string(std::strerror(errno)));
            }
            if (ready == 0)
                throw ProtocolError("simulator did not reply within " + std::to_string(timeout_.count()) + " ms");
            char chunk[4096];
            const ssize_t n = ::read(readFd_, chunk, sizeof chunk);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw ProtocolError("read from simulator failed: " + std::string(std::strerror(errno)));
            }
            if (n == 0) throw ProtocolError("simulator closed the connection");
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    void closeAll() {
        if (writeFd_ >= 0 && writeFd_ != readFd_) ::close(writeFd_);
        if (readFd_ >= 0) ::close(readFd_);
        readFd_ = writeFd_ = -1;
    }

private:
    int readFd_;
    int writeFd_;
    std::chrono::milliseconds timeout_;
    std::string buffer_;
};

class ExternalSimulator final : public Simulator {
public:
    ExternalSimulator(std::unique_ptr<LineChannel> channel, pid_t child, std::vector<std::string> defaults)
        : channel_(std::move(channel)), child_(child), defaults_(std::move(defaults)) {}

    ~ExternalSimulator() override {
        try {
            channel_->send("QUIT");
        } catch (...) {
        }
        channel_->closeAll();
        if (child_ > 0) {
            // Give the child a moment to exit on QUIT/EOF, then make sure.
            for (int i = 0; i < 50; ++i) {
                if (::waitpid(child_, nullptr, WNOHANG) == child_) return;
                ::usleep(2000);
            }
            ::kill(-child_, SIGKILL);
            ::kill(child_, SIGKILL);
            ::waitpid(child_, nullptr, 0);
        }
    }

    std::vector<std::string> defaultObservables() const override { return defaults_; }

    void handshake() { expectOk("RESET 0"); }

protected:
    void doReset(std::uint64_t seed) override { expectOk("RESET " + std::to_string(seed)); }
    void doNext() override { expectOk("NEXT"); }

    int doResolve(std::string_view name) override {
        const std::string key(name);
        if (key.empty() || key.find_first_of(" \n\r") != std::string::npos) return -1;
        if (auto it = slots_.find(key); it != slots_.end()) return it->second;
        const int slot = static_cast<int>(names_.size());
        names_.push_back(key);
        slots_.emplace(key, slot);
        return slot;
    }

    double doRead(int slot) override {
        const std::string& name = names_[static_cast<std::size_t>(slot)];
        channel_->send("EVAL " + name);
        const std::string reply = channel_->receive();
        if (reply.starts_with("ERR unknown observable")) throw UnknownObservableError(name);
        const auto value = protocol::parseReal(reply);
        if (!value) throw ProtocolError("protocol violation: EVAL " + name + " answered '" + reply + "'");
        return *value;
    }

private:
    void expectOk(const std::string& command) {
        channel_->send(command);
        const std::string reply = channel_->receive();
        if (reply != "OK") throw ProtocolError("protocol violation: " + command + " answered '" + reply + "'");
    }

    std::unique_ptr<LineChannel> channel_;
    pid_t child_;
    std::vector<std::string> defaults_;
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> slots_;
};

std::unique_ptr<ExternalSimulator> launchCommand(const ExternalSimSpec& spec) {
    int toChild[2];
    int fromChild[2];
    if (::pipe(toChild) != 0) throw ProtocolError("pipe failed");
    if (::pipe(fromChild) != 0) {
        ::close(toChild[0]);
        ::close(toChild[1]);
        throw ProtocolError("pipe failed");
    }
    const std::string command = "exec " + spec.command;
    const pid_t pid = ::fork();
    if (pid < 0) throw ProtocolError("fork failed: " + std::string(std::strerror(errno)));
    if (pid == 0) {
        ::dup2(toChild[0], STDIN_FILENO);
        ::dup2(fromChild[1], STDOUT_FILENO);
        ::close(toChild[0]);
        ::close(toChild[1]);
        ::close(fromChild[0]);
        ::close(fromChild[1]);
        // Own process group, so teardown also reaches anything the shell spawned.
        ::setpgid(0, 0);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(toChild[0]);
    ::close(fromChild[1]);
    ::fcntl(toChild[1], F_SETFD, FD_CLOEXEC);
    ::fcntl(fromChild[0], F_SETFD, FD_CLOEXEC);
    auto channel = std::make_unique<LineChannel>(fromChild[0], toChild[1], spec.timeout);
    return std::make_unique<ExternalSimulator>(std::move(channel), pid, spec.defaultObservables);
}

std::unique_ptr<ExternalSimulator> connectTcp(const ExternalSimSpec& spec) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* found = nullptr;
    const std::string port = std::to_string(spec.port);
    if (const int rc = ::getaddrinfo(spec.host.c_str(), port.c_str(), &hints, &found); rc != 0)
        throw ProtocolError("cannot resolve " + spec.host + ": " + ::gai_strerror(rc));
    int fd = -1;
    for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(found);
    if (fd < 0) throw ProtocolError("cannot connect to " + spec.host + ":" + port);
    auto channel = std::make_unique<LineChannel>(fd, fd, spec.timeout);
    return std::make_unique<ExternalSimulator>(std::move(channel), -1, spec.defaultObservables);
}

}  // namespace

std::unique_ptr<Simulator> connectExternal(const ExternalSimSpec& spec) {
    ignoreSigpipe();
    auto sim = spec.transport == ExternalSimSpec::Transport::Command ? launchCommand(spec) : connectTcp(spec);
    sim->handshake();
    return sim;
}

}  // namespace smc
