"""Minimal W3C WebDriver wire-protocol client.

Speaks plain HTTP+JSON to a driver endpoint (chromedriver or
compatible): session management with extension-loading capabilities,
element find/click/sendKeys/clear, script execution, page source. Only
the surface the harness needs; no vendor SDK.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

import requests


class WebDriverError(Exception):
    def __init__(self, message: str, error: str = "", status: int = 0):
        super().__init__(message)
        self.error = error
        self.status = status


class WebDriverUnreachable(WebDriverError):
    pass


class NoSuchElement(WebDriverError):
    pass


@dataclass
class Element:
    session: "WireSession"
    element_id: str

    def click(self) -> None:
        self.session._post(f"element/{self.element_id}/click", {})

    def send_keys(self, text: str) -> None:
        self.session._post(f"element/{self.element_id}/value",
                           {"text": text, "value": list(text)})

    def clear(self) -> None:
        self.session._post(f"element/{self.element_id}/clear", {})


_ELEMENT_KEY = "element-6066-11e4-a52e-4f735466cecf"


class WireSession:
    """One live browser session over the wire protocol."""

    def __init__(self, endpoint: str, session_id: str,
                 http: requests.Session, timeout: float):
        self.endpoint = endpoint.rstrip("/")
        self.session_id = session_id
        self._http = http
        self._timeout = timeout

    # ---- plumbing

    def _url(self, suffix: str) -> str:
        return f"{self.endpoint}/session/{self.session_id}/{suffix}"

    def _request(self, method: str, suffix: str, body: dict | None) -> Any:
        try:
            response = self._http.request(
                method, self._url(suffix),
                data=json.dumps(body) if body is not None else None,
                headers={"Content-Type": "application/json"},
                timeout=self._timeout)
        except requests.RequestException as exc:
            raise WebDriverUnreachable(f"driver endpoint lost: {exc}") from exc
        try:
            payload = response.json()
        except ValueError as exc:
            raise WebDriverError(
                f"non-JSON driver response ({response.status_code})") from exc
        value = payload.get("value")
        if response.status_code >= 400 or (
                isinstance(value, dict) and value.get("error")):
            error = value.get("error", "") if isinstance(value, dict) else ""
            message = value.get("message", "") if isinstance(value, dict) else ""
            if error == "no such element":
                raise NoSuchElement(message, error, response.status_code)
            raise WebDriverError(message or f"driver error {error}",
                                 error, response.status_code)
        return value

    def _post(self, suffix: str, body: dict) -> Any:
        return self._request("POST", suffix, body)

    def _get(self, suffix: str) -> Any:
        return self._request("GET", suffix, None)

    # ---- protocol surface

    def get(self, url: str) -> None:
        self._post("url", {"url": url})

    def current_url(self) -> str:
        return self._get("url")

    def page_source(self) -> str:
        return self._get("source")

    def execute_script(self, script: str, args: list | None = None) -> Any:
        return self._post("execute/sync", {"script": script,
                                           "args": args or []})

    def find_element(self, css: str) -> Element:
        value = self._post("element", {"using": "css selector", "value": css})
        return Element(self, value[_ELEMENT_KEY])

    def find_elements(self, css: str) -> list[Element]:
        values = self._post("elements", {"using": "css selector", "value": css})
        return [Element(self, v[_ELEMENT_KEY]) for v in values]

    def window_handles(self) -> list[str]:
        return self._get("window/handles")

    def switch_window(self, handle: str) -> None:
        self._post("window", {"handle": handle})

    def quit(self) -> None:
        try:
            self._request("DELETE", "", None)
        except WebDriverError:
            pass

    # ---- harness conveniences (css-locator based)

    def click(self, css: str) -> None:
        self.find_element(css).click()

    def fill(self, css: str, text: str) -> None:
        element = self.find_element(css)
        element.clear()
        element.send_keys(text)


def open_wire_session(endpoint: str, *, extension_dir: str | None = None,
                      profile_dir: str | None = None, headless: bool = True,
                      connect_timeout: float = 10.0,
                      command_timeout: float = 60.0) -> WireSession:
    """Create a browser session with an unpacked extension loaded."""
    args = ["--no-sandbox", "--disable-dev-shm-usage",
            "--disable-background-networking"]
    if headless:
        args.append("--headless=new")
    if extension_dir:
        args.append(f"--load-extension={extension_dir}")
        args.append(f"--disable-extensions-except={extension_dir}")
    if profile_dir:
        args.append(f"--user-data-dir={profile_dir}")
    capabilities = {
        "capabilities": {
            "alwaysMatch": {
                "goog:chromeOptions": {"args": args},
            }
        }
    }
    http = requests.Session()
    try:
        response = http.post(f"{endpoint.rstrip('/')}/session",
                             data=json.dumps(capabilities),
                             headers={"Content-Type": "application/json"},
                             timeout=connect_timeout)
    except requests.RequestException as exc:
        raise WebDriverUnreachable(
            f"cannot reach WebDriver endpoint {endpoint}: {exc}") from exc
    payload = response.json()
    value = payload.get("value") or {}
    if response.status_code >= 400 or "sessionId" not in value:
        message = value.get("message", "session rejected") \
            if isinstance(value, dict) else "session rejected"
        raise WebDriverError(message, status=response.status_code)
    return WireSession(endpoint, value["sessionId"], http, command_timeout)
