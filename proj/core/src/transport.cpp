#include "simulst/wire.hpp"

#include <arpa/inet.h>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

namespace simulst {

namespace {

std::string errno_text(const char *what) { return std::string(what) + ": " + std::strerror(errno); }

void write_all(int fd, std::string_view data, bool socket) {
    while (!data.empty()) {
        const ssize_t n = socket ? ::send(fd, data.data(), data.size(), MSG_NOSIGNAL)
                                 : ::write(fd, data.data(), data.size());
        if (n < 0) {
            if (errno == EINTR) continue;
            throw BackendError(errno_text("write to backend failed"));
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
}

void send_line(int fd, std::string_view line, bool socket) {
    if (line.find('\n') != std::string_view::npos)
        throw InvalidArgument("wire messages must not contain newlines");
    std::string framed(line);
    framed.push_back('\n');
    write_all(fd, framed, socket);
}

std::string receive_line(int fd, std::string &buffer, std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        if (auto nl = buffer.find('\n'); nl != std::string::npos) {
            std::string line = buffer.substr(0, nl);
            buffer.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return line;
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) throw BackendError("backend timed out waiting for a response");
        pollfd pfd{fd, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
        if (ready < 0) {
            if (errno == EINTR) continue;
            throw BackendError(errno_text("poll failed"));
        }
        if (ready == 0) continue;
        char chunk[4096];
        const ssize_t n = ::read(fd, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw BackendError(errno_text("read from backend failed"));
        }
        if (n == 0) {
            if (!buffer.empty()) {
                // peer hung up mid-line: hand the fragment to the decoder
                std::string line = std::move(buffer);
                buffer.clear();
                return line;
            }
            throw BackendError("backend closed the connection");
        }
        buffer.append(chunk, static_cast<std::size_t>(n));
    }
}

} // namespace

// ─── Child process ──────────────────────────────────────────────────────────

ProcessTransport::ProcessTransport(std::vector<std::string> argv) {
    if (argv.empty()) throw InvalidArgument("backend command is empty");
    std::signal(SIGPIPE, SIG_IGN);

    int in_pipe[2];
    int out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw BackendError(errno_text("pipe"));
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        throw BackendError(errno_text("pipe"));
    }

    std::vector<char *> args;
    for (auto &a : argv) args.push_back(a.data());
    args.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0) {
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
        throw BackendError(errno_text("fork"));
    }
    if (pid == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::execvp(args[0], args.data());
        ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
}

ProcessTransport::~ProcessTransport() {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    if (pid_ > 0) {
        // closing stdin lets a well-behaved server exit on its own
        for (int i = 0; i < 200; ++i) {
            if (::waitpid(pid_, nullptr, WNOHANG) == pid_) return;
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, nullptr, 0);
    }
}

void ProcessTransport::write_line(std::string_view line) { send_line(to_child_, line, false); }

std::string ProcessTransport::read_line(std::chrono::milliseconds timeout) {
    return receive_line(from_child_, buffer_, timeout);
}

// ─── TCP client ─────────────────────────────────────────────────────────────

TcpTransport::TcpTransport(const std::string &host, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo *result = nullptr;
    const std::string service = std::to_string(port);
    if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &result); rc != 0)
        throw BackendError("cannot resolve " + host + ": " + ::gai_strerror(rc));
    for (auto *ai = result; ai; ai = ai->ai_next) {
        const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
            fd_ = fd;
            break;
        }
        ::close(fd);
    }
    ::freeaddrinfo(result);
    if (fd_ < 0) throw BackendError("cannot connect to " + host + ":" + service);
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

TcpTransport::~TcpTransport() {
    if (fd_ >= 0) ::close(fd_);
}

void TcpTransport::write_line(std::string_view line) { send_line(fd_, line, true); }

std::string TcpTransport::read_line(std::chrono::milliseconds timeout) {
    return receive_line(fd_, buffer_, timeout);
}

// ─── TCP server ─────────────────────────────────────────────────────────────

TcpServer::TcpServer(std::uint16_t port, Factory factory) : factory_(std::move(factory)) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (listen_fd_ < 0) throw BackendError(errno_text("socket"));
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr *>(&addr), sizeof addr) != 0 ||
        ::listen(listen_fd_, 16) != 0) {
        const auto message = errno_text("cannot listen");
        ::close(listen_fd_);
        throw BackendError(message);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr *>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

TcpServer::~TcpServer() {
    stop();
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpServer::stop() {
    if (!stopping_.exchange(true) && listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
}

void TcpServer::run() {
    std::vector<std::thread> workers;
    while (!stopping_) {
        const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd < 0) {
            if (errno == EINTR) continue;
            break;
        }
        workers.emplace_back([fd, this] {
            auto backends = factory_();
            std::string buffer;
            try {
                for (;;) {
                    const auto line = receive_line(fd, buffer, std::chrono::hours(24));
                    if (line.empty()) continue;
                    send_line(fd, handle_request_line(line, *backends.asr, *backends.mt), true);
                }
            } catch (const std::exception &) {
                // client went away
            }
            ::close(fd);
        });
    }
    for (auto &w : workers) w.join();
}

} // namespace simulst
