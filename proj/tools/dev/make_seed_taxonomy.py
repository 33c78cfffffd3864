#!/usr/bin/env python3
# Copyright 2026 The SeqGuard Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes data/seed_taxonomy.json in canonical form (sorted keys, 2-space indent)."""
import json
import pathlib

FO, NET, NFT, C2 = "File Operations", "Basic Network Ops", "Network File Transfer", "Command & Control"
TPA, EXF, CODE, INFO = "Third-party Platform Abuse", "Data Exfiltration", "Code Execution", "Info Gathering"
CRYPT, SYS, XFORM, PERS = "Encryption/Hashing", "System Operations", "Data Transformation", "Persistence/Stealth"


def t(path, call_only=True, last_arg=None):
    d = {"module_path": path, "call_only": call_only}
    if last_arg is not None:
        d["last_arg"] = last_arg
    return d


E = [
    # File Operations
    ("basic_file_reading", FO, "Opens or reads a local file's contents.",
     [t("open"), t("io.open"), t("pathlib.Path.read_text"), t("pathlib.Path.read_bytes")]),
    ("basic_file_writing", FO, "Writes data to a local file.",
     [t("pathlib.Path.write_text"), t("pathlib.Path.write_bytes")]),
    ("create_directory", FO, "Creates a directory on the local file system.",
     [t("os.makedirs"), t("os.mkdir"), t("pathlib.Path.mkdir")]),
    ("copy_file", FO, "Copies a file to another location.",
     [t("shutil.copy"), t("shutil.copy2"), t("shutil.copyfile")]),
    ("delete_file", FO, "Removes files or directory trees.",
     [t("os.remove"), t("os.unlink"), t("shutil.rmtree")]),
    ("list_directory", FO, "Enumerates directory entries or walks a file tree.",
     [t("os.listdir"), t("os.walk"), t("os.scandir"), t("glob.glob")]),
    ("path_string_operations", FO, "Builds or normalizes file system path strings.",
     [t("os.path.join"), t("os.path.abspath"), t("os.path.dirname"), t("os.path.expanduser")]),
    # Basic Network Ops
    ("create_socket", NET, "Creates a raw network socket object.", [t("socket.socket")]),
    ("establish_tcp_connection", NET, "Connects a socket to a remote TCP endpoint.",
     [t("socket.socket.connect"), t("socket.create_connection")]),
    ("create_http_connection", NET, "Opens an HTTP client connection or session.",
     [t("http.client.HTTPConnection"), t("http.client.HTTPSConnection"), t("requests.Session"),
      t("urllib3.PoolManager")]),
    ("send_http_get", NET, "Issues an HTTP GET request to a remote server.",
     [t("requests.get"), t("urllib.request.urlopen"), t("httpx.get"), t("requests.Session.get")]),
    ("send_http_post", NET, "Sends data to a remote server with an HTTP POST request.",
     [t("requests.post"), t("httpx.post"), t("requests.Session.post")]),
    ("resolve_hostname", NET, "Resolves a host name to network addresses.",
     [t("socket.gethostbyname"), t("socket.getaddrinfo")]),
    # Network File Transfer
    ("download_file_url", NFT, "Downloads a remote file from a URL to disk.",
     [t("urllib.request.urlretrieve"), t("wget.download")]),
    ("upload_file_transfer_sh", NFT, "Uploads a local file to a public file-sharing service.",
     [t("requests.put")]),
    ("exfiltrate_folder", NFT, "Archives a whole folder for transfer off the machine.",
     [t("shutil.make_archive"), t("zipfile.ZipFile.write")]),
    ("send_file_ftp", NFT, "Transfers files to a remote FTP server.",
     [t("ftplib.FTP"), t("ftplib.FTP.storbinary")]),
    # Command & Control
    ("execute_shell_command", C2, "Runs a command string through the system shell.",
     [t("os.system"), t("subprocess.getoutput"), t("subprocess.getstatusoutput")]),
    ("spawn_process_shell", C2, "Spawns an interactive shell or shell-backed process pipe.",
     [t("os.popen"), t("pty.spawn")]),
    ("decrypt_fernet_data", C2, "Decrypts a Fernet-encrypted payload.",
     [t("cryptography.fernet.Fernet.decrypt")]),
    ("dup_socket_stdin", C2, "Redirects standard input to a duplicated descriptor.",
     [t("os.dup2", True, "0"), t("os.dup2", True, "sys.stdin.fileno()")]),
    ("dup_socket_stdout", C2, "Redirects standard output to a duplicated descriptor.",
     [t("os.dup2", True, "1"), t("os.dup2", True, "sys.stdout.fileno()")]),
    ("dup_socket_stderr", C2, "Redirects standard error to a duplicated descriptor.",
     [t("os.dup2", True, "2"), t("os.dup2", True, "sys.stderr.fileno()")]),
    # Third-party Platform Abuse
    ("create_discord_bot", TPA, "Instantiates a Discord bot or client.",
     [t("discord.Client"), t("discord.ext.commands.Bot")]),
    ("send_discord_message", TPA, "Posts a message or file through a Discord webhook.",
     [t("discord_webhook.DiscordWebhook"), t("dhooks.Webhook"), t("discord.SyncWebhook.from_url")]),
    ("check_roblox_cookie", TPA, "Validates a stolen Roblox session cookie.",
     [t("robloxpy.User"), t("rbxcookie.check")]),
    ("send_telegram_message", TPA, "Sends a message through a Telegram bot.",
     [t("telebot.TeleBot"), t("telegram.Bot")]),
    # Data Exfiltration
    ("init_evil_class", EXF, "Initializes a class bundling malicious routines.", []),
    ("init_grabber_class", EXF, "Initializes a credential or data grabber object.", []),
    ("init_sender_class", EXF, "Initializes an object that ships harvested data out.", []),
    ("copy_to_clipboard", EXF, "Places text onto the system clipboard.",
     [t("pyperclip.copy"), t("win32clipboard.SetClipboardText")]),
    # Code Execution
    ("exec_python_code", CODE, "Executes a dynamically supplied Python code string.",
     [t("exec"), t("eval"), t("builtins.exec"), t("builtins.eval")]),
    ("import_dynamic", CODE, "Imports a module chosen at runtime.",
     [t("__import__"), t("importlib.import_module"), t("importlib.__import__")]),
    ("compile_code_object", CODE, "Compiles source text into a code object.",
     [t("compile"), t("builtins.compile")]),
    ("load_marshal_code", CODE, "Deserializes a marshalled code object.", [t("marshal.loads")]),
    # Info Gathering
    ("get_chrome_passwords", INFO, "Reads and decrypts browser-stored credentials.",
     [t("win32crypt.CryptUnprotectData"), t("browser_cookie3.chrome")]),
    ("capture_screen_region", INFO, "Captures a screenshot of the display.",
     [t("PIL.ImageGrab.grab"), t("pyautogui.screenshot"), t("mss.mss")]),
    ("get_os_info", INFO, "Queries operating system name, release, or platform details.",
     [t("platform.system"), t("platform.platform"), t("platform.uname"), t("os.uname")]),
    ("get_env_var", INFO, "Reads process environment variables.",
     [t("os.environ", False), t("os.environ.*", False), t("os.getenv")]),
    ("get_clipboard_text", INFO, "Reads the current clipboard contents.",
     [t("pyperclip.paste"), t("win32clipboard.GetClipboardData")]),
    ("get_hostname", INFO, "Reads the local machine host name.",
     [t("socket.gethostname"), t("platform.node")]),
    ("get_username", INFO, "Reads the current user's login name.",
     [t("getpass.getuser"), t("os.getlogin")]),
    # Encryption/Hashing
    ("generate_aes_cipher", CRYPT, "Constructs an AES cipher object.",
     [t("Crypto.Cipher.AES.new"), t("cryptography.hazmat.primitives.ciphers.Cipher")]),
    ("decrypt_aes_data", CRYPT, "Decrypts data with an AES cipher.",
     [t("Crypto.Cipher.AES.new.decrypt"),
      t("cryptography.hazmat.primitives.ciphers.Cipher.decryptor")]),
    ("create_md5_hash", CRYPT, "Computes an MD5 digest.", [t("hashlib.md5")]),
    ("create_sha256_hash", CRYPT, "Computes a SHA-256 digest.", [t("hashlib.sha256")]),
    # System Operations
    ("create_child_process", SYS, "Forks or starts a child process object.",
     [t("os.fork"), t("multiprocessing.Process")]),
    ("create_thread", SYS, "Starts a new thread of execution.", [t("threading.Thread")]),
    ("set_registry_value", SYS, "Writes a value into the Windows registry.",
     [t("winreg.SetValueEx"), t("_winreg.SetValueEx")]),
    ("spawn_process_no_shell", SYS, "Starts a subprocess from an argument list without a shell.",
     [t("subprocess.run"), t("subprocess.Popen"), t("subprocess.call"), t("subprocess.check_call")]),
    ("read_process_stdout", SYS, "Collects output produced by a child process.",
     [t("subprocess.check_output"), t("subprocess.Popen.communicate"),
      t("subprocess.run.stdout", False), t("subprocess.Popen.stdout", False)]),
    ("exit_program", SYS, "Terminates the running interpreter.",
     [t("sys.exit"), t("os._exit"), t("exit"), t("quit")]),
    ("change_file_permissions", SYS, "Changes file mode bits.", [t("os.chmod")]),
    ("sleep_execution", SYS, "Pauses execution for a period of time.", [t("time.sleep")]),
    # Data Transformation
    ("decode_base64_to_bytes", XFORM, "Decodes base64 text into raw bytes.",
     [t("base64.b64decode"), t("base64.decodebytes"), t("base64.urlsafe_b64decode")]),
    ("encode_base64", XFORM, "Encodes bytes as base64 text.",
     [t("base64.b64encode"), t("base64.encodebytes")]),
    ("serialize_to_json", XFORM, "Serializes an object to JSON text.",
     [t("json.dumps"), t("json.dump")]),
    ("convert_int_to_char", XFORM, "Converts integer code points into characters.", [t("chr")]),
    ("decompress_zlib", XFORM, "Decompresses zlib-compressed bytes.", [t("zlib.decompress")]),
    # Persistence/Stealth
    ("check_persistence_entry", PERS, "Inspects registry keys used for autostart persistence.",
     [t("winreg.OpenKey"), t("winreg.QueryValueEx")]),
    ("open_sqlite_db", PERS, "Opens a local SQLite database file.", [t("sqlite3.connect")]),
    ("disable_ssl_warnings", PERS, "Suppresses TLS certificate warnings.",
     [t("urllib3.disable_warnings"), t("requests.packages.urllib3.disable_warnings")]),
    ("hide_console_window", PERS, "Hides the process console window from the user.",
     [t("ctypes.windll.user32.ShowWindow"), t("ctypes.windll.kernel32.GetConsoleWindow")]),
]

entries = [
    {"action": a, "category": c, "description": d, "triggers": tr} for a, c, d, tr in E
]
entries.sort(key=lambda e: e["action"])
assert len({e["action"] for e in entries}) == len(entries)
doc = {"version": 1, "entries": entries}
out = pathlib.Path(__file__).resolve().parents[2] / "data" / "seed_taxonomy.json"
out.write_text(json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
print(f"{len(entries)} actions, {len({e['category'] for e in entries})} categories -> {out}")
