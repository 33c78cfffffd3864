import shutil
import threading
import time


def start(job, scratch):
    worker = threading.Thread(target=job)
    worker.start()
    time.sleep(0.5)
    shutil.rmtree(scratch, ignore_errors=True)
