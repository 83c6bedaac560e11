// Copyright 2026 The Modelgate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "modelgate/http_server.h"

#include <httplib.h>

#include <cctype>
#include <thread>

#include "json_codec.h"
#include "modelgate/error.h"

namespace modelgate {

struct HttpService::Impl {
  httplib::Server server;
  std::thread thread;
};

namespace {

using json::Json;

void SendJson(httplib::Response& res, int status, const std::string& body) {
  res.status = status;
  res.set_content(body, "application/json");
}

void SendError(httplib::Response& res, const Error& e) {
  Json j = Json::object();
  j["error"] = std::string(ErrorCodeName(e.code()));
  j["detail"] = e.detail();
  SendJson(res, HttpStatusFor(e.code()), json::Dump(j));
}

std::string Lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

HttpCall ToCall(const httplib::Request& req) {
  HttpCall call;
  call.method = req.method;
  call.path = req.path;
  call.body = req.body;
  for (const auto& [k, v] : req.params) call.query.emplace(k, v);
  for (const auto& [k, v] : req.headers) call.headers.emplace(Lower(k), v);
  return call;
}

// Runs `fn`, mapping library errors onto the error document.
template <typename Fn>
void Guard(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    SendError(res, e);
  } catch (const std::exception& e) {
    SendError(res, Error(ErrorCode::kStorageFailure, e.what()));
  }
}

}  // namespace

HttpService::HttpService() : impl_(std::make_unique<Impl>()) {}

HttpService::~HttpService() { Stop(); }

int HttpService::Start(const std::string& host, int port) {
  host_ = host;
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port(host);
  } else {
    port_ = impl_->server.bind_to_port(host, port) ? port : -1;
  }
  if (port_ <= 0) throw Error(ErrorCode::kStorageFailure, "cannot bind " + host);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

bool HttpService::Run(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  return impl_->server.listen(host, port);
}

void HttpService::Stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string HttpService::url() const { return "http://" + host_ + ":" + std::to_string(port_); }

GatewayServer::GatewayServer(Gateway& gateway, AdminApi* admin) {
  httplib::Server& s = impl().server;
  s.Post("/v1/score", [&gateway](const httplib::Request& req, httplib::Response& res) {
    Guard(res, [&] {
      ScoreOutcome out = gateway.HandleScore(DecodeScoreRequest(req.body));
      res.set_header("x-modelgate-served-by", out.response.served_by.ToString());
      res.set_header("x-modelgate-rule", std::string(ServeRuleName(out.rule)));
      res.set_header("x-modelgate-decision-id", std::to_string(out.seq));
      SendJson(res, 200, Encode(out.response));
    });
  });
  s.Post("/v1/feedback", [&gateway](const httplib::Request& req, httplib::Response& res) {
    Guard(res, [&] {
      FeedbackRecord fb = DecodeFeedback(req.body);
      FeedbackAck ack = gateway.HandleFeedback(fb);
      Json j = Json::object();
      j["request_id"] = fb.request_id;
      j["status"] = ack.join == JoinResult::kJoined ? "joined" : "duplicate";
      j["forwarded"] = ack.forwarded;
      SendJson(res, 200, json::Dump(j));
    });
  });
  s.Post("/v1/notify", [&gateway](const httplib::Request& req, httplib::Response& res) {
    Guard(res, [&] {
      RegistrationOptions options;
      if (req.has_param("deployment_id")) options.deployment_id = req.get_param_value("deployment_id");
      NotifyAck ack = gateway.HandleNotify(DecodeNotification(req.body), options);
      Json j = Json::object();
      j["model_id"] = ack.record.id.ToString();
      j["stage"] = std::string(StageName(ack.record.stage));
      j["outcome"] = std::string(NotifyOutcomeName(ack.outcome));
      j["deployment_id"] = ack.record.deployment_id;
      SendJson(res, 200, json::Dump(j));
    });
  });
  if (admin != nullptr) {
    auto handler = [admin](const httplib::Request& req, httplib::Response& res) {
      HttpReply reply = admin->Handle(ToCall(req));
      res.status = reply.status;
      res.set_content(reply.body, reply.content_type);
    };
    s.Get("/admin/.*", handler);
    s.Post("/admin/.*", handler);
    s.Put("/admin/.*", handler);
  }
}

BackendServer::BackendServer(std::shared_ptr<Backend> backend, std::chrono::milliseconds delay) {
  httplib::Server& s = impl().server;
  s.Post("/v1/score", [backend, delay](const httplib::Request& req, httplib::Response& res) {
    Guard(res, [&] {
      ScoreRequest request = DecodeScoreRequest(req.body);
      if (delay.count() > 0) std::this_thread::sleep_for(delay);
      BackendResult r = backend->Score(request, std::chrono::hours(1));
      if (!r.ok() || !r.response) {
        Json j = Json::object();
        j["error"] = r.error_code;
        j["detail"] = r.error_text;
        SendJson(res, 500, json::Dump(j));
        return;
      }
      SendJson(res, 200, Encode(*r.response));
    });
  });
  s.Post("/v1/feedback", [backend](const httplib::Request& req, httplib::Response& res) {
    Guard(res, [&] {
      bool ok = backend->Feedback(DecodeFeedback(req.body));
      SendJson(res, ok ? 200 : 500, ok ? "{\"status\":\"ok\"}" : "{\"status\":\"refused\"}");
    });
  });
}

}  // namespace modelgate
