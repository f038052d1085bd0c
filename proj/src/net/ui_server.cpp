#include "softhand/net/ui_server.hpp"

#include <chrono>
#include <deque>
#include <future>

#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "softhand/error.hpp"
#include "softhand/net/clients.hpp"

namespace softhand::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using asio::ip::tcp;
using nlohmann::json;

namespace {

constexpr std::size_t kMaxQueuedMessages = 32;

std::string error_message(const std::string& text) { return json{{"type", "error"}, {"message", text}}.dump(); }

double wall_seconds() {
    using namespace std::chrono;
    return duration<double>(system_clock::now().time_since_epoch()).count();
}

}  // namespace

class UiServer::Session : public std::enable_shared_from_this<Session> {
  public:
    Session(tcp::socket socket, UiServer& server) : socket_(std::move(socket)), server_(server) {}

    void start() {
        http::async_read(socket_, buffer_, request_,
                         [self = shared_from_this()](beast::error_code ec, std::size_t) {
                             if (!ec) self->on_request();
                         });
    }

    void send(std::shared_ptr<const std::string> message) {
        if (!ws_ || closed_) return;
        // A slow client loses broadcasts rather than growing an unbounded backlog.
        if (queue_.size() >= kMaxQueuedMessages) return;
        queue_.push_back(std::move(message));
        if (queue_.size() == 1) write_next();
    }

    void close() {
        closed_ = true;
        beast::error_code ec;
        if (ws_) {
            beast::get_lowest_layer(*ws_).shutdown(tcp::socket::shutdown_both, ec);
        } else {
            socket_.shutdown(tcp::socket::shutdown_both, ec);
        }
    }

  private:
    void on_request() {
        if (!websocket::is_upgrade(request_) || request_.target() != "/ws") {
            auto response = std::make_shared<http::response<http::string_body>>(http::status::not_found,
                                                                                request_.version());
            response->set(http::field::content_type, "text/plain");
            response->body() = "websocket endpoint is /ws\n";
            response->prepare_payload();
            http::async_write(socket_, *response,
                              [self = shared_from_this(), response](beast::error_code, std::size_t) {
                                  beast::error_code ignored;
                                  self->socket_.shutdown(tcp::socket::shutdown_both, ignored);
                              });
            return;
        }
        ws_.emplace(std::move(socket_));
        ws_->text(true);
        ws_->async_accept(request_, [self = shared_from_this()](beast::error_code ec) {
            if (ec) return;
            self->server_.sessions_.insert(self);
            self->send(std::make_shared<const std::string>(self->server_.state_message().dump()));
            self->read_next();
        });
    }

    void read_next() {
        ws_->async_read(read_buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->closed_ = true;
                self->server_.sessions_.erase(self);
                return;
            }
            const std::string text = beast::buffers_to_string(self->read_buffer_.data());
            self->read_buffer_.consume(self->read_buffer_.size());
            if (auto reply = self->server_.handle_message(text))
                self->send(std::make_shared<const std::string>(std::move(*reply)));
            self->read_next();
        });
    }

    void write_next() {
        ws_->async_write(asio::buffer(*queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->closed_ = true;
                self->queue_.clear();
                return;
            }
            self->queue_.pop_front();
            if (!self->queue_.empty()) self->write_next();
        });
    }

    tcp::socket socket_;
    UiServer& server_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> request_;
    std::optional<websocket::stream<tcp::socket>> ws_;
    beast::flat_buffer read_buffer_;
    std::deque<std::shared_ptr<const std::string>> queue_;
    bool closed_ = false;
};

UiServer::UiServer(UiServerOptions options)
    : options_(std::move(options)), unit_(options_.config.units.at(options_.unit)), acceptor_(io_) {
    boost::system::error_code ec;
    const auto address = asio::ip::make_address(options_.bind.host, ec);
    if (ec) throw TransportError("invalid bind address '" + options_.bind.host + "'");
    const tcp::endpoint ep(address, options_.bind.port);
    acceptor_.open(ep.protocol(), ec);
    if (!ec) acceptor_.set_option(tcp::acceptor::reuse_address(true), ec);
    if (!ec) acceptor_.bind(ep, ec);
    if (!ec) acceptor_.listen(asio::socket_base::max_listen_connections, ec);
    if (ec) throw TransportError("cannot listen on " + options_.bind.str() + ": " + ec.message());
    port_ = acceptor_.local_endpoint().port();

    wrist_ = options_.config.arm_home;
    arm_current_ = arm_target_ = options_.config.arm_home;

    accept_next();
    io_thread_ = std::thread([this] { io_.run(); });
    poll_thread_ = std::thread([this] { poll_loop(); });
    teleop_thread_ = std::thread([this] { teleop_loop(); });
}

UiServer::~UiServer() { stop(); }

void UiServer::stop() {
    if (stopped_) return;
    stopped_ = true;
    stopping_ = true;
    session_restart_ = true;
    stop_replay();
    mailbox_.close();
    if (teleop_thread_.joinable()) teleop_thread_.join();
    if (poll_thread_.joinable()) poll_thread_.join();
    std::promise<void> closed;
    asio::post(io_, [this, &closed] {
        for (const auto& s : sessions_) s->close();
        sessions_.clear();
        boost::system::error_code ec;
        acceptor_.close(ec);
        closed.set_value();
    });
    closed.get_future().wait_for(std::chrono::seconds(1));
    io_.stop();
    if (io_thread_.joinable()) io_thread_.join();
}

void UiServer::accept_next() {
    acceptor_.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
        if (ec == asio::error::operation_aborted) return;
        if (!ec) std::make_shared<Session>(std::move(socket), *this)->start();
        if (acceptor_.is_open()) accept_next();
    });
}

void UiServer::broadcast(std::string message) {
    auto shared = std::make_shared<const std::string>(std::move(message));
    asio::post(io_, [this, shared] {
        for (const auto& s : sessions_) s->send(shared);
    });
}

json UiServer::state_message() {
    std::lock_guard lock(mutex_);
    json angles = json::object();
    for (hand::DofId id : hand::all_dofs()) angles[std::string(hand::dof_name(id))] = operator_hand_[id];
    json tips = json::object();
    const auto positions = hand::fingertip_positions(operator_hand_, options_.config.hand);
    for (std::size_t i = 0; i < hand::kFingerCount; ++i)
        tips[std::string(hand::finger_name(static_cast<hand::Finger>(i)))] = {positions[i].x(), positions[i].y(),
                                                                              positions[i].z()};
    json msg = {{"type", "state"},
                {"t", wall_seconds()},
                {"unit", unit_.name},
                {"hand", angles},
                {"pressures", {{"commanded", commanded_.channels}, {"actual", actual_}}},
                {"arm", {{"current", teleop::pose_to_json(arm_current_)}, {"target", teleop::pose_to_json(arm_target_)}}},
                {"fingertips", tips},
                {"session", session_stats_},
                {"connected", {{"valve", valve_connected_}, {"arm", arm_connected_}}}};
    if (!last_error_.empty()) msg["last_error"] = last_error_;
    return msg;
}

void UiServer::post_frame_locked() {
    commanded_ = hand::hand_to_pressures(operator_hand_, options_.config.hand);
    mailbox_.post(teleop::TrackedFrame{wall_seconds(), wrist_, operator_hand_});
}

std::optional<std::string> UiServer::handle_message(std::string_view text) {
    json msg;
    try {
        msg = json::parse(text);
    } catch (const json::parse_error&) {
        return error_message("malformed message: not JSON");
    }
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string())
        return error_message("message needs a string 'type' field");
    const std::string type = msg["type"];
    try {
        if (type == "set_dof") {
            if (!msg.contains("dof") || !msg["dof"].is_string()) return error_message("set_dof needs 'dof'");
            const auto id = hand::dof_from_name(msg["dof"].get<std::string>());
            if (!id) return error_message("unknown dof '" + msg["dof"].get<std::string>() + "'");
            if (!msg.contains("angle") || !msg["angle"].is_number()) return error_message("set_dof needs numeric 'angle'");
            std::lock_guard lock(mutex_);
            operator_hand_[*id] = std::clamp(msg["angle"].get<double>(), 0.0, options_.config.hand.limit(*id));
            post_frame_locked();
            return std::nullopt;
        }
        if (type == "preset") {
            if (!msg.contains("name") || !msg["name"].is_string()) return error_message("preset needs 'name'");
            hand::HandState preset = hand::preset_pose(msg["name"].get<std::string>());
            std::lock_guard lock(mutex_);
            hand::clamp_to_limits(preset, options_.config.hand);
            operator_hand_ = preset;
            post_frame_locked();
            return std::nullopt;
        }
        if (type == "wrist_target") {
            if (!msg.contains("pose")) return error_message("wrist_target needs 'pose'");
            const Pose pose = teleop::pose_from_json(msg["pose"]);
            std::lock_guard lock(mutex_);
            wrist_ = pose;
            post_frame_locked();
            return std::nullopt;
        }
        if (type == "calibrate") {
            std::lock_guard lock(mutex_);
            alignment_ = teleop::calibrate(wrist_, arm_current_);
            session_restart_ = true;
            return std::nullopt;
        }
        if (type == "start_replay") {
            if (!msg.contains("file") || !msg["file"].is_string()) return error_message("start_replay needs 'file'");
            start_replay(msg["file"].get<std::string>());
            return std::nullopt;
        }
        if (type == "stop") {
            stop_replay();
            return std::nullopt;
        }
    } catch (const Error& e) {
        return error_message(e.what());
    }
    return error_message("unknown command type '" + type + "'");
}

void UiServer::start_replay(const std::string& file) {
    const std::filesystem::path name(file);
    if (name.empty() || name.is_absolute() || name.lexically_normal().string().rfind("..", 0) == 0)
        throw InputError("replay file must be a relative path inside the replay directory");
    auto frames = teleop::load_trajectory(options_.replay_dir / name);
    stop_replay();
    replay_stop_ = false;
    replay_thread_ = std::thread([this, frames = std::move(frames)] {
        if (frames.empty()) return;
        teleop::SteadyClock clock;
        const double start = clock.now();
        for (const auto& f : frames) {
            const double due = start + (f.t - frames.front().t);
            while (clock.now() < due) {
                if (replay_stop_ || stopping_) return;
                clock.sleep_until(std::min(due, clock.now() + 0.05));
            }
            std::lock_guard lock(mutex_);
            operator_hand_ = f.hand;
            hand::clamp_to_limits(operator_hand_, options_.config.hand);
            wrist_ = f.wrist;
            post_frame_locked();
        }
    });
}

void UiServer::stop_replay() {
    replay_stop_ = true;
    if (replay_thread_.joinable()) replay_thread_.join();
}

void UiServer::poll_loop() {
    ValveClient valves(unit_.valve, std::chrono::milliseconds(200));
    ArmClient arm(unit_.arm, std::chrono::milliseconds(200));
    teleop::SteadyClock clock;
    const double period = 1.0 / options_.config.ui_broadcast_hz;
    double next = clock.now();
    while (!stopping_) {
        std::optional<std::array<double, 16>> actual;
        std::optional<Pose> current;
        std::optional<Pose> target;
        try {
            actual = valves.read_actual();
        } catch (const Error&) {
        }
        try {
            current = arm.current();
            target = arm.target();
        } catch (const Error&) {
        }
        {
            std::lock_guard lock(mutex_);
            valve_connected_ = actual.has_value();
            arm_connected_ = current.has_value();
            if (actual) actual_ = *actual;
            if (current) arm_current_ = *current;
            if (target) arm_target_ = *target;
        }
        broadcast(state_message().dump());
        next += period;
        const double now = clock.now();
        if (next < now) next = now;
        clock.sleep_until(next);
    }
}

void UiServer::teleop_loop() {
    teleop::SteadyClock clock;
    while (!stopping_) {
        ValveClient valves(unit_.valve, std::chrono::milliseconds(500));
        ArmClient arm(unit_.arm, std::chrono::milliseconds(500));
        session_restart_ = stopping_.load();
        teleop::FrameAlignment alignment;
        {
            std::lock_guard lock(mutex_);
            alignment = alignment_;
        }
        teleop::SessionOptions session;
        session.rate_hz = options_.config.command_rate_hz;
        session.smoothing_alpha = options_.config.smoothing_alpha;
        session.stop = &session_restart_;
        session.on_tick = [this](const teleop::TickInfo& tick) {
            std::string rejection;
            {
                std::lock_guard lock(mutex_);
                session_stats_ = {{"ticks_sent", tick.report.ticks_sent},
                                  {"idle_ticks", tick.report.idle_ticks},
                                  {"frames_dropped", tick.report.frames_dropped},
                                  {"arm_rejections", tick.report.arm_rejections}};
                if (tick.commands && tick.move == teleop::MoveResult::rejected_workspace) {
                    last_error_ = "ERR workspace";
                    rejection = last_error_;
                }
            }
            if (!rejection.empty())
                broadcast(json{{"type", "error"}, {"source", "arm"}, {"message", rejection}}.dump());
        };
        const auto report = teleop::run_teleop(mailbox_, valves, arm, alignment, options_.config.hand, session, clock);
        if (report.aborted) {
            {
                std::lock_guard lock(mutex_);
                last_error_ = report.error;
            }
            // Back off before reconnecting to a simulator that went away.
            for (int i = 0; i < 10 && !stopping_; ++i) clock.sleep_until(clock.now() + 0.05);
        }
    }
}

}  // namespace softhand::net
