// Standalone runner for the vulnerable fixture server used by the test
// suites and for manual scanner exercises.

#include "pth/fixture_server.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

namespace {
volatile std::sig_atomic_t g_stop = 0;
void handle_signal(int) { g_stop = 1; }
} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deliberately vulnerable fixture server (local testing only)"};

    int port = 0;
    std::string manifest_out, cert, key;
    app.add_option("--port", port, "Port to bind (default: any free port)");
    app.add_option("--manifest-out", manifest_out,
                   "Write the ground-truth manifest JSON to this file");
    app.add_option("--cert", cert, "TLS certificate PEM (enables HTTPS)");
    app.add_option("--key", key, "TLS private key PEM");

    CLI11_PARSE(app, argc, argv);

    try {
        pth::FixtureSpec spec = pth::default_fixture_spec();
        spec.port = port;
        pth::FixtureServer server(spec, cert, key);

        std::string manifest = server.manifest().dump(2) + "\n";
        std::cout << manifest;
        if (!manifest_out.empty()) {
            std::ofstream out(manifest_out);
            out << manifest;
        }
        std::cout << "serving on " << server.base_url() << " (Ctrl-C to stop)\n";

        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
        server.stop();
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << "\n";
        return 1;
    }
}
