import hashlib

from Crypto.Cipher import AES


def unseal(key, iv, blob):
    cipher = AES.new(key, AES.MODE_CBC, iv)
    plain = cipher.decrypt(blob)
    digest = hashlib.sha256(plain).hexdigest()
    return plain, digest
