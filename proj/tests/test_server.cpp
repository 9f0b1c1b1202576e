#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>

#include "gsik/service.hpp"
#include "support.hpp"

using namespace gsik;
namespace net = boost::asio;
namespace beast = boost::beast;
using tcp = net::ip::tcp;
using nlohmann::json;

namespace {

class Client {
 public:
  explicit Client(unsigned short port) : ws_(io_) {
    tcp::resolver resolver(io_);
    net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/");
  }
  ~Client() {
    beast::error_code ec;
    ws_.close(beast::websocket::close_code::normal, ec);
  }

  void send(const std::string& text) { ws_.write(net::buffer(text)); }
  void send(const json& doc) { send(doc.dump()); }

  json receive() {
    beast::flat_buffer buffer;
    ws_.read(buffer);
    return json::parse(beast::buffers_to_string(buffer.data()));
  }

  // Next message of the given type, skipping anything else.
  json receive(const std::string& type) {
    for (int i = 0; i < 1000; ++i) {
      json m = receive();
      if (m["type"] == type) return m;
    }
    FAIL("no " << type << " message");
    return {};
  }

 private:
  net::io_context io_;
  beast::websocket::stream<tcp::socket> ws_;
};

struct Running {
  Server server;
  explicit Running(ServerOptions options) : server(testing::biped(), std::move(options)) { server.start(); }
  ~Running() { server.stop(); }
};

ServerOptions local(std::string static_dir = {}) {
  ServerOptions o;
  o.address = "127.0.0.1";
  o.port = 0;
  o.static_dir = std::move(static_dir);
  return o;
}

std::pair<int, std::string> http_get(unsigned short port, const std::string& target) {
  net::io_context io;
  beast::tcp_stream stream(io);
  tcp::resolver resolver(io);
  stream.connect(resolver.resolve("127.0.0.1", std::to_string(port)));
  beast::http::request<beast::http::string_body> req{beast::http::verb::get, target, 11};
  req.set(beast::http::field::host, "127.0.0.1");
  beast::http::write(stream, req);
  beast::flat_buffer buffer;
  beast::http::response<beast::http::string_body> res;
  beast::http::read(stream, buffer, res);
  beast::error_code ec;
  stream.socket().shutdown(tcp::socket::shutdown_both, ec);
  return {res.result_int(), res.body()};
}

}  // namespace

TEST_SUITE("server") {
  TEST_CASE("greeting, SetTarget replies and malformed input") {
    Running r(local());
    REQUIRE(r.server.port() != 0);
    Client c(r.server.port());
    CHECK(c.receive()["type"] == "Skeleton");
    const json pose = c.receive();
    REQUIRE(pose["type"] == "PoseUpdate");
    CHECK(pose["angles"].size() == 30);

    for (int k = 0; k < 5; ++k) {
      c.send(json{{"type", "SetTarget"}, {"effector", "right-hand"}, {"position", {0.3 + 0.01 * k, 1.1, 0.3}}});
      CHECK(c.receive("PoseUpdate")["angles"].size() == 30);
      const json stats = c.receive("SolveStats");
      CHECK(stats["iterations"].get<int>() >= 0);
    }

    c.send(std::string("not json"));
    CHECK(c.receive("Error")["message"].get<std::string>().size() > 0);
    c.send(json{{"type", "RebaseRoot"}, {"joint", "l_ankle_z"}});
    CHECK(c.receive("Skeleton")["skeleton"]["joints"].size() == 30);
  }

  TEST_CASE("connections do not share sessions") {
    Running r(local());
    Client a(r.server.port()), b(r.server.port());
    a.receive("PoseUpdate");
    const json b_pose = b.receive("PoseUpdate");
    a.send(json{{"type", "SetTarget"}, {"effector", "left-hand"}, {"position", {0.35, 1.2, -0.3}}});
    const json a_pose = a.receive("PoseUpdate");
    CHECK(a_pose["angles"] != b_pose["angles"]);
    b.send(json{{"type", "SetConfig"}, {"max_iterations", 3}});
    b.send(json{{"type", "SetTarget"}, {"effector", "head"}, {"position", {0.0, 1.66, 0.0}}});
    CHECK(b.receive("SolveStats")["iterations"].get<int>() <= 3 * 2 * 3);
  }

  TEST_CASE("gait mode streams without client input") {
    ServerOptions o = local();
    o.tick_hz = 120;
    Running r(o);
    Client c(r.server.port());
    c.receive("PoseUpdate");
    c.send(json{{"type", "StartGait"}});
    c.receive("PoseUpdate");
    const auto start = std::chrono::steady_clock::now();
    for (int k = 0; k < 30; ++k) c.receive("PoseUpdate");
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(5));
    c.send(json{{"type", "StopGait"}});
  }

  TEST_CASE("static files are served from the configured directory") {
    const auto dir = std::filesystem::temp_directory_path() / "gsik_static_test";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "index.html") << "<html>viewer</html>";
    Running r(local(dir.string()));
    const auto [status, body] = http_get(r.server.port(), "/");
    CHECK(status == 200);
    CHECK(body == "<html>viewer</html>");
    CHECK(http_get(r.server.port(), "/missing.js").first == 404);
    CHECK(http_get(r.server.port(), "/../etc/passwd").first == 404);
    std::filesystem::remove_all(dir);
  }
}
